#include "chaos/fem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "chaos/io.hpp"

namespace chaos::fem {

namespace {

std::atomic<std::uint64_t> g_solve_count{0};

}  // namespace

Mesh::Mesh(int cells_per_side) : cells_(cells_per_side), h_(1.0 / cells_per_side)
{
    if (cells_per_side < 2) throw std::invalid_argument("Mesh: cells_per_side must be >= 2");
    const int n = cells_;
    triangles_.reserve(std::size_t(2 * n * n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int p00 = node_id(a, b), p10 = node_id(a + 1, b);
            const int p01 = node_id(a, b + 1), p11 = node_id(a + 1, b + 1);
            triangles_.push_back({p00, p10, p11});
            triangles_.push_back({p00, p11, p01});
        }
    interior_of_node_.assign(std::size_t(num_nodes()), -1);
    for (int a = 1; a < n; ++a)
        for (int b = 1; b < n; ++b) {
            interior_of_node_[std::size_t(node_id(a, b))] = int(node_of_interior_.size());
            node_of_interior_.push_back(node_id(a, b));
        }
}

Mesh build_mesh(int cells_per_side) { return Mesh(cells_per_side); }

Point Mesh::node(int id) const
{
    const int a = id / (cells_ + 1), b = id % (cells_ + 1);
    return node(a, b);
}

bool Mesh::on_boundary(int id) const
{
    const int a = id / (cells_ + 1), b = id % (cells_ + 1);
    return a == 0 || b == 0 || a == cells_ || b == cells_;
}

Vector Mesh::to_nodal(const Vector& interior) const
{
    if (interior.size() != num_interior()) throw std::invalid_argument("to_nodal: size mismatch");
    Vector nodal = Vector::Zero(num_nodes());
    for (int k = 0; k < num_interior(); ++k) nodal[node_of_interior(k)] = interior[k];
    return nodal;
}

Vector SparseMatrix::multiply(const Vector& x) const
{
    Vector y(rows);
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = row_ptr[std::size_t(r)]; k < row_ptr[std::size_t(r) + 1]; ++k)
            s += values[std::size_t(k)] * x[cols[std::size_t(k)]];
        y[r] = s;
    }
    return y;
}

double SparseMatrix::at(int r, int c) const
{
    for (int k = row_ptr[std::size_t(r)]; k < row_ptr[std::size_t(r) + 1]; ++k)
        if (cols[std::size_t(k)] == c) return values[std::size_t(k)];
    return 0.0;
}

Vector SparseMatrix::diagonal() const
{
    Vector d(rows);
    for (int r = 0; r < rows; ++r) d[r] = at(r, r);
    return d;
}

double source_term(Point p)
{
    using std::numbers::pi;
    return pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
}

FemProblem assemble(const Mesh& mesh, const Vector& nodal_log_perm, SolverSettings settings)
{
    if (nodal_log_perm.size() != mesh.num_nodes())
        throw std::invalid_argument("assemble: log-permeability must have one value per mesh node");
    if (!nodal_log_perm.allFinite()) throw std::invalid_argument("assemble: non-finite log-permeability");

    FemProblem prob;
    prob.mesh = &mesh;
    prob.nodal_log_perm = nodal_log_perm;
    prob.settings = settings;

    // Sparsity pattern from element connectivity.
    const int n = mesh.num_interior();
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(n));
    for (const auto& tri : mesh.triangles())
        for (int r : tri) {
            const int ir = mesh.interior_index(r);
            if (ir < 0) continue;
            for (int c : tri) {
                const int ic = mesh.interior_index(c);
                if (ic >= 0) pattern[std::size_t(ir)].push_back(ic);
            }
        }
    SparseMatrix& A = prob.op;
    A.rows = n;
    A.row_ptr.assign(std::size_t(n) + 1, 0);
    for (int r = 0; r < n; ++r) {
        auto& row = pattern[std::size_t(r)];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        A.row_ptr[std::size_t(r) + 1] = A.row_ptr[std::size_t(r)] + int(row.size());
        A.cols.insert(A.cols.end(), row.begin(), row.end());
    }
    A.values.assign(A.cols.size(), 0.0);
    prob.load = Vector::Zero(n);

    auto slot = [&](int r, int c) -> double& {
        for (int k = A.row_ptr[std::size_t(r)]; k < A.row_ptr[std::size_t(r) + 1]; ++k)
            if (A.cols[std::size_t(k)] == c) return A.values[std::size_t(k)];
        throw std::logic_error("assemble: entry outside sparsity pattern");
    };

    static constexpr int kEdges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (const auto& tri : mesh.triangles()) {
        const Point p[3] = {mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])};
        const double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
        const double area = 0.5 * std::abs(det);
        // Gradients of the barycentric basis functions.
        double gx[3], gy[3];
        for (int i = 0; i < 3; ++i) {
            const Point& pj = p[(i + 1) % 3];
            const Point& pk = p[(i + 2) % 3];
            gx[i] = (pj.y - pk.y) / det;
            gy[i] = (pk.x - pj.x) / det;
        }

        double kbar = 0.0;
        double fe[3] = {0.0, 0.0, 0.0};
        for (const auto& e : kEdges) {
            const int i = e[0], j = e[1];
            kbar += std::exp(0.5 * (nodal_log_perm[tri[std::size_t(i)]] + nodal_log_perm[tri[std::size_t(j)]]));
            const double fq = source_term({0.5 * (p[i].x + p[j].x), 0.5 * (p[i].y + p[j].y)});
            // Basis values at the midpoint of edge (i, j) are 1/2 on i and j.
            fe[i] += 0.5 * fq;
            fe[j] += 0.5 * fq;
        }
        kbar /= 3.0;

        for (int r = 0; r < 3; ++r) {
            const int ir = mesh.interior_index(tri[std::size_t(r)]);
            if (ir < 0) continue;
            prob.load[ir] += area / 3.0 * fe[r];
            for (int c = 0; c < 3; ++c) {
                const int ic = mesh.interior_index(tri[std::size_t(c)]);
                if (ic < 0) continue;
                slot(ir, ic) += area * kbar * (gx[r] * gx[c] + gy[r] * gy[c]);
            }
        }
    }
    return prob;
}

Solution solve(const FemProblem& problem)
{
    g_solve_count.fetch_add(1, std::memory_order_relaxed);

    const SparseMatrix& A = problem.op;
    const Vector& b = problem.load;
    const int n = A.rows;
    const int max_iter = problem.settings.max_iterations > 0 ? problem.settings.max_iterations : 10 * n;
    const Vector inv_diag = A.diagonal().cwiseInverse();

    Solution sol;
    sol.values = Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return sol;

    Vector r = b;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    for (int it = 1; it <= max_iter; ++it) {
        const Vector Ap = A.multiply(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0) || !std::isfinite(pAp)) throw SolveError("solve: operator lost positive definiteness");
        const double alpha = rz / pAp;
        sol.values += alpha * p;
        r -= alpha * Ap;
        const double rel = r.norm() / bnorm;
        if (rel <= problem.settings.rel_tolerance) {
            sol.iterations = it;
            sol.rel_residual = rel;
            return sol;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw SolveError("solve: conjugate gradients did not converge in " + std::to_string(max_iter) + " iterations");
}

std::uint64_t solve_count() { return g_solve_count.load(std::memory_order_relaxed); }

void reset_solve_count() { g_solve_count.store(0, std::memory_order_relaxed); }

ObservationOperator::ObservationOperator(const Mesh& mesh, std::vector<int> node_ids) : nodes_(std::move(node_ids))
{
    for (int id : nodes_) {
        if (id < 0 || id >= mesh.num_nodes()) throw std::invalid_argument("ObservationOperator: node out of range");
        const int k = mesh.interior_index(id);
        if (k < 0) throw std::invalid_argument("ObservationOperator: observed node lies on the boundary");
        if (std::find(interior_.begin(), interior_.end(), k) != interior_.end())
            throw std::invalid_argument("ObservationOperator: duplicate node");
        interior_.push_back(k);
    }
}

Vector ObservationOperator::apply(const Vector& interior_values) const
{
    Vector out(Eigen::Index(interior_.size()));
    for (std::size_t k = 0; k < interior_.size(); ++k) out[Eigen::Index(k)] = interior_values[interior_[k]];
    return out;
}

ObservationOperator default_observation(const Mesh& mesh)
{
    static constexpr int kSteps[4] = {5, 7, 9, 11};
    if (mesh.cells_per_side() < 12)
        throw std::invalid_argument("default_observation: mesh too coarse for the observation layout");
    std::vector<int> ids;
    for (int a : kSteps)
        for (int b : kSteps) ids.push_back(mesh.node_id(a, b));
    return ObservationOperator(mesh, std::move(ids));
}

double eval_at_point(const Mesh& mesh, const Vector& interior_values, Point x)
{
    if (!(x.x >= 0.0 && x.x <= 1.0 && x.y >= 0.0 && x.y <= 1.0))
        throw std::out_of_range("eval_at_point: point outside the unit square");
    if (interior_values.size() != mesh.num_interior()) throw std::invalid_argument("eval_at_point: size mismatch");
    const int n = mesh.cells_per_side();
    const double h = mesh.spacing();
    const int a = std::min(int(std::floor(x.x / h)), n - 1);
    const int b = std::min(int(std::floor(x.y / h)), n - 1);
    const double s = (x.x - a * h) / h;
    const double t = (x.y - b * h) / h;
    auto value = [&](int ia, int ib) {
        const int k = mesh.interior_index(mesh.node_id(ia, ib));
        return k < 0 ? 0.0 : interior_values[k];
    };
    if (t <= s)  // lower triangle (p00, p10, p11)
        return (1.0 - s) * value(a, b) + (s - t) * value(a + 1, b) + t * value(a + 1, b + 1);
    return (1.0 - t) * value(a, b) + (t - s) * value(a, b + 1) + s * value(a + 1, b + 1);
}

void write_nodal_csv(const std::string& path, const Mesh& mesh, const Vector& nodal,
                     const std::vector<std::string>& metadata)
{
    if (nodal.size() != mesh.num_nodes()) throw std::invalid_argument("write_nodal_csv: size mismatch");
    io::CsvWriter csv(path, metadata, {"x", "y", "value"});
    for (int id = 0; id < mesh.num_nodes(); ++id) {
        const Point p = mesh.node(id);
        csv.cell(p.x).cell(p.y).cell(nodal[id]);
        csv.end_row();
    }
}

Vector read_nodal_csv(const std::string& path, const Mesh& mesh)
{
    const io::CsvTable table = io::read_csv(path);
    if (int(table.rows.size()) != mesh.num_nodes())
        throw std::runtime_error("read_nodal_csv: expected one row per mesh node in " + path);
    Vector nodal(mesh.num_nodes());
    const double h = mesh.spacing();
    for (const auto& row : table.rows) {
        if (row.size() != 3) throw std::runtime_error("read_nodal_csv: malformed row in " + path);
        const int a = int(std::lround(std::stod(row[0]) / h));
        const int b = int(std::lround(std::stod(row[1]) / h));
        nodal[mesh.node_id(a, b)] = std::stod(row[2]);
    }
    return nodal;
}

void write_grid_csv(const std::string& path, const Mesh& mesh, const Vector& nodal,
                    const std::vector<std::string>& metadata)
{
    if (nodal.size() != mesh.num_nodes()) throw std::invalid_argument("write_grid_csv: size mismatch");
    const int m = mesh.nodes_per_side();
    std::vector<std::string> header{"y\\x"};
    for (int a = 0; a < m; ++a) header.push_back(io::format_double(mesh.node(a, 0).x));
    io::CsvWriter csv(path, metadata, header);
    for (int b = 0; b < m; ++b) {
        csv.cell(mesh.node(0, b).y);
        for (int a = 0; a < m; ++a) csv.cell(nodal[mesh.node_id(a, b)]);
        csv.end_row();
    }
}

}  // namespace chaos::fem
