#pragma once

// Flat-file output shared by the modules: CSV with '#'-prefixed metadata
// lines and a header row, plus minimal static SVG plots.

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace chaos::io {

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view text);
[[nodiscard]] std::string hex64(std::uint64_t v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& metadata,
              const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(const std::string& v);
    CsvWriter& cell(const char* v) { return cell(std::string(v)); }
    void end_row();

private:
    std::ofstream out_;
    bool row_started_ = false;
};

struct CsvTable {
    std::vector<std::string> metadata;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

[[nodiscard]] CsvTable read_csv(const std::string& path);
[[nodiscard]] std::vector<std::string> split(std::string_view line, char sep);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool markers_only = false;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

void write_line_plot(const std::string& path, const std::vector<Series>& series, const PlotOptions& opts);

/// Filled-cell rendering of a row-major grid (rows = y, columns = x).
void write_heatmap(const std::string& path, const std::vector<std::vector<double>>& grid,
                   const std::string& title);

}  // namespace chaos::io
