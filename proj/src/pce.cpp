#include "chaos/pce.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <optional>

#include "chaos/io.hpp"

namespace chaos {

EllipticForward::EllipticForward(fem::Mesh mesh, field::KlBasis basis, fem::SolverSettings settings)
    : mesh_(std::move(mesh)), basis_(std::move(basis)), settings_(settings)
{
    if (basis_.num_nodes != mesh_.num_nodes()) throw std::invalid_argument("EllipticForward: basis/mesh mismatch");
}

fem::Solution EllipticForward::solve(const Vector& theta) const
{
    const Vector y = field::field_from_params(basis_, theta);
    const fem::FemProblem prob = fem::assemble(mesh_, y, settings_);
    return fem::solve(prob);
}

Vector EllipticForward::operator()(const Vector& theta) const { return solve(theta).values; }

ForwardMap EllipticForward::as_map() const
{
    return [this](const Vector& theta) { return (*this)(theta); };
}

EllipticForward make_default_forward(int m, int cells_per_side)
{
    fem::Mesh mesh(cells_per_side);
    field::KlBasis basis = field::kl_decompose(field::CovarianceSpec{}, mesh, m);
    return EllipticForward(std::move(mesh), std::move(basis));
}

namespace pce {

ForwardFailure::ForwardFailure(std::size_t node_, Vector theta_, const std::string& what)
    : std::runtime_error("forward evaluation failed at collocation node " + std::to_string(node_) + ": " + what),
      node(node_), theta(std::move(theta_))
{
}

namespace {

// Phi_i(theta) for every index, using one Hermite sweep per coordinate.
void fill_basis(const std::vector<MultiIndex>& indices, int order, const Vector& theta,
                std::vector<std::vector<double>>& scratch, double* out)
{
    const auto dim = std::size_t(theta.size());
    scratch.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) hermite_eval_all(order, theta[Eigen::Index(d)], scratch[d]);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        double p = 1.0;
        for (std::size_t d = 0; d < dim; ++d) p *= scratch[d][std::size_t(indices[i][d])];
        out[i] = p;
    }
}

}  // namespace

PceModel build_pce(const ForwardMap& forward, int dim, int order, BuildOptions options)
{
    if (order < 0 || order % 2 != 0) throw std::invalid_argument("build_pce: order must be even and nonnegative");
    if (dim < 1) throw std::invalid_argument("build_pce: dimension must be >= 1");
    const int q = order + 2;
    const TensorRule rule = tensor_rule(dim, q, options.budget);
    const auto count = Eigen::Index(rule.size());

    std::vector<Vector> outputs(rule.size());
    std::vector<std::exception_ptr> errors(rule.size());
    if (options.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index k = 0; k < count; ++k) {
            try {
                outputs[std::size_t(k)] = forward(rule.nodes.row(k).transpose());
            } catch (...) {
                errors[std::size_t(k)] = std::current_exception();
            }
        }
    } else {
        for (Eigen::Index k = 0; k < count; ++k) {
            try {
                outputs[std::size_t(k)] = forward(rule.nodes.row(k).transpose());
            } catch (...) {
                errors[std::size_t(k)] = std::current_exception();
            }
        }
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k]) continue;
        try {
            std::rethrow_exception(errors[k]);
        } catch (const std::exception& e) {
            throw ForwardFailure(k, rule.nodes.row(Eigen::Index(k)).transpose(), e.what());
        }
    }

    PceModel model;
    model.dim = dim;
    model.order = order;
    model.indices = multi_indices(dim, order);
    const auto out_dim = outputs.front().size();
    model.coefficients = Matrix::Zero(Eigen::Index(model.indices.size()), out_dim);
    model.provenance = {q, std::uint64_t(rule.size())};

    std::vector<double> phi(model.indices.size());
    std::vector<std::vector<double>> scratch;
    for (Eigen::Index k = 0; k < count; ++k) {
        const Vector& h = outputs[std::size_t(k)];
        if (h.size() != out_dim) throw std::runtime_error("build_pce: forward output size changed between nodes");
        fill_basis(model.indices, order, rule.nodes.row(k).transpose(), scratch, phi.data());
        const double w = rule.weights[std::size_t(k)];
        for (std::size_t i = 0; i < phi.size(); ++i) model.coefficients.row(Eigen::Index(i)) += (w * phi[i]) * h.transpose();
    }
    return model;
}

Vector basis_values(const PceModel& model, const Vector& theta)
{
    if (theta.size() != model.dim) throw std::invalid_argument("evaluate_pce: dimension mismatch");
    Vector phi(Eigen::Index(model.indices.size()));
    std::vector<std::vector<double>> scratch;
    fill_basis(model.indices, model.order, theta, scratch, phi.data());
    return phi;
}

Vector evaluate_pce(const PceModel& model, const Vector& theta)
{
    return model.coefficients.transpose() * basis_values(model, theta);
}

double relative_error_at(const PceModel& model, const EllipticForward& forward, const Vector& theta, fem::Point x)
{
    const fem::Mesh& mesh = forward.mesh();
    const double h = mesh.spacing();
    const int a = int(std::lround(x.x / h)), b = int(std::lround(x.y / h));
    if (a < 0 || b < 0 || a > mesh.cells_per_side() || b > mesh.cells_per_side() ||
        std::abs(a * h - x.x) > 1e-12 || std::abs(b * h - x.y) > 1e-12)
        throw std::invalid_argument("relative_error_at: point is not a mesh node");
    const int k = mesh.interior_index(mesh.node_id(a, b));
    if (k < 0) throw std::domain_error("relative_error_at: FEM solution vanishes at a boundary node");

    const double u_fem = forward(theta)[k];
    if (std::abs(u_fem) < 1e-14) throw std::domain_error("relative_error_at: FEM value too small for a relative error");
    const double u_pce = evaluate_pce(model, theta)[k];
    return 100.0 * std::abs(u_fem - u_pce) / std::abs(u_fem);
}

std::vector<double> coefficient_decay(const PceModel& model)
{
    std::vector<double> out(std::size_t(model.order) + 1, 0.0);
    for (std::size_t i = 0; i < model.indices.size(); ++i) {
        const double v = model.coefficients.row(Eigen::Index(i)).cwiseAbs().maxCoeff();
        auto& slot = out[std::size_t(model.indices[i].degree())];
        slot = std::max(slot, v);
    }
    return out;
}

void save_pce(const std::string& path, const PceModel& model, const std::vector<std::string>& metadata)
{
    auto meta = metadata;
    meta.push_back("dim=" + std::to_string(model.dim));
    meta.push_back("order=" + std::to_string(model.order));
    meta.push_back("output_dim=" + std::to_string(model.output_dim()));
    std::vector<std::string> header;
    for (int d = 0; d < model.dim; ++d) header.push_back("i" + std::to_string(d + 1));
    for (int c = 0; c < model.output_dim(); ++c) header.push_back("a" + std::to_string(c));
    {
        io::CsvWriter csv(path, meta, header);
        for (std::size_t i = 0; i < model.indices.size(); ++i) {
            for (int e : model.indices[i].entries()) csv.cell(e);
            for (int c = 0; c < model.output_dim(); ++c) csv.cell(model.coefficients(Eigen::Index(i), c));
            csv.end_row();
        }
    }
    std::ofstream side(path + ".provenance");
    if (!side) throw std::runtime_error("cannot write " + path + ".provenance");
    side << "dim=" << model.dim << "\norder=" << model.order << "\nquad_points=" << model.provenance.quad_points
         << "\nforward_solves=" << model.provenance.forward_solves << "\noutput_dim=" << model.output_dim() << '\n';
}

PceModel load_pce(const std::string& path)
{
    const io::CsvTable table = io::read_csv(path);
    std::optional<int> dim, order;
    for (const auto& m : table.metadata) {
        if (m.rfind("dim=", 0) == 0) dim = std::stoi(m.substr(4));
        if (m.rfind("order=", 0) == 0) order = std::stoi(m.substr(6));
    }
    if (!dim || !order) throw std::runtime_error("load_pce: missing dim/order metadata in " + path);

    PceModel model;
    model.dim = *dim;
    model.order = *order;
    model.indices = multi_indices(model.dim, model.order);
    if (table.rows.size() != model.indices.size()) throw std::runtime_error("load_pce: wrong number of rows in " + path);
    const auto out_dim = Eigen::Index(table.header.size()) - model.dim;
    model.coefficients.resize(Eigen::Index(model.indices.size()), out_dim);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (Eigen::Index(row.size()) != model.dim + out_dim) throw std::runtime_error("load_pce: ragged row");
        std::vector<int> e(std::size_t(model.dim));
        for (int d = 0; d < model.dim; ++d) e[std::size_t(d)] = std::stoi(row[std::size_t(d)]);
        if (!(MultiIndex(e) == model.indices[i])) throw std::runtime_error("load_pce: index order mismatch");
        for (Eigen::Index c = 0; c < out_dim; ++c)
            model.coefficients(Eigen::Index(i), c) = std::stod(row[std::size_t(model.dim + c)]);
    }

    std::ifstream side(path + ".provenance");
    std::string line;
    while (side && std::getline(side, line)) {
        if (line.rfind("quad_points=", 0) == 0) model.provenance.quad_points = std::stoi(line.substr(12));
        if (line.rfind("forward_solves=", 0) == 0) model.provenance.forward_solves = std::stoull(line.substr(15));
    }
    return model;
}

}  // namespace pce
}  // namespace chaos
