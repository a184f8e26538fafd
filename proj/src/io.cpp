#include "chaos/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace chaos::io {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& metadata,
                     const std::vector<std::string>& header)
    : out_(path)
{
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& m : metadata) out_ << "# " << m << '\n';
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v)
{
    if (row_started_) out_ << ',';
    out_ << v;
    row_started_ = true;
    return *this;
}

void CsvWriter::end_row()
{
    out_ << '\n';
    row_started_ = false;
}

std::vector<std::string> split(std::string_view line, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        parts.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto text = line.substr(1);
            if (!text.empty() && text[0] == ' ') text.erase(0, 1);
            table.metadata.push_back(text);
            continue;
        }
        if (!have_header) {
            table.header = split(line, ',');
            have_header = true;
        } else {
            table.rows.push_back(split(line, ','));
        }
    }
    return table;
}

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 55;

std::string esc(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_line_plot(const std::string& path, const std::vector<Series>& series, const PlotOptions& opts)
{
    auto tx = [&](double v) { return opts.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return opts.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            const double a = tx(s.x[k]), b = ty(s.y[k]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            x0 = std::min(x0, a); x1 = std::max(x1, a);
            y0 = std::min(y0, b); y1 = std::max(y1, b);
        }
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return kTop + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(opts.title)
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
        const double xs = kLeft + pw * t / 4, ys = kTop + ph - ph * t / 4;
        std::ostringstream lx, ly;
        lx.precision(3);
        ly.precision(3);
        lx << (opts.log_x ? std::pow(10.0, xv) : xv);
        ly << (opts.log_y ? std::pow(10.0, yv) : yv);
        out << "<text x=\"" << xs << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << lx.str()
            << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << ys + 4 << "\" text-anchor=\"end\">" << ly.str()
            << "</text>\n";
    }
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
        << esc(opts.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << kTop + ph / 2 << ")\">" << esc(opts.y_label) << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#17becf", "#7b3294", "#d62728", "#2ca02c"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const std::string color = ser.color.empty() ? palette[s % 5] : ser.color;
        std::ostringstream pts;
        for (std::size_t k = 0; k < ser.x.size(); ++k) {
            if (!std::isfinite(tx(ser.x[k])) || !std::isfinite(ty(ser.y[k]))) continue;
            pts << px(ser.x[k]) << ',' << py(ser.y[k]) << ' ';
            out << "<circle cx=\"" << px(ser.x[k]) << "\" cy=\"" << py(ser.y[k]) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        }
        if (!ser.markers_only)
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
                << "\"/>\n";
        const double ly = kTop + 14 + 18 * double(s);
        out << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << kWidth - kRight + 28 << "\" y=\"" << ly << "\">" << esc(ser.label) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_heatmap(const std::string& path, const std::vector<std::vector<double>>& grid, const std::string& title)
{
    if (grid.empty()) throw std::invalid_argument("write_heatmap: empty grid");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : grid)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = hi > lo ? hi - lo : 1.0;
    const std::size_t rows = grid.size(), cols = grid.front().size();
    const double cell = 20.0;
    const double w = cell * double(cols), h = cell * double(rows);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 20 << "\" height=\"" << h + 60
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"10\" y=\"20\">" << esc(title) << "</text>\n";
    std::ostringstream range;
    range.precision(4);
    range << "min " << lo << "  max " << hi;
    out << "<text x=\"10\" y=\"" << h + 52 << "\">" << range.str() << "</text>\n";
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double t = (grid[r][c] - lo) / span;
            const int red = int(255 * t), blue = int(255 * (1 - t)), green = int(255 * (1 - std::abs(2 * t - 1)));
            // row 0 is y = 0, drawn at the bottom
            out << "<rect x=\"" << 10 + cell * double(c) << "\" y=\"" << 30 + cell * double(rows - 1 - r)
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ',' << green << ','
                << blue << ")\"/>\n";
        }
    out << "</svg>\n";
}

}  // namespace chaos::io
