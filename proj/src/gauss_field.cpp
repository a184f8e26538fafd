#include "chaos/gauss_field.hpp"

#include <cmath>
#include <stdexcept>

#include "chaos/io.hpp"

namespace chaos::field {

void CovarianceSpec::validate() const
{
    if (!(sigma1 > 0 && sigma2 > 0 && l1 > 0 && l2 > 0))
        throw std::invalid_argument("CovarianceSpec: all parameters must be positive");
}

double covariance(const CovarianceSpec& spec, fem::Point x, fem::Point y)
{
    const double dx = x.x - y.x, dy = x.y - y.y;
    const double s = spec.sigma1 * spec.sigma1 * spec.sigma2 * spec.sigma2;
    return s * std::exp(-dx * dx / spec.l1 - dy * dy / spec.l2);
}

namespace {

// Eigenvalues closer than this (relative) are treated as one eigenspace.
constexpr double kDegenerateTol = 1e-8;

void fix_sign(Eigen::Ref<Vector> v, const Vector& probe)
{
    if (v.dot(probe) < 0.0) v = -v;
}

}  // namespace

KlBasis kl_decompose(const CovarianceSpec& spec, const fem::Mesh& mesh, int m)
{
    spec.validate();
    const int n = mesh.num_nodes();
    if (m < 1 || m > n) throw std::invalid_argument("kl_decompose: truncation must be in [1, number of nodes]");

    const int side = mesh.nodes_per_side();
    Vector w(n);
    for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) {
            const double wa = (a == 0 || a == side - 1) ? 0.5 : 1.0;
            const double wb = (b == 0 || b == side - 1) ? 0.5 : 1.0;
            w[mesh.node_id(a, b)] = wa * wb * mesh.spacing() * mesh.spacing();
        }
    const Vector sw = w.cwiseSqrt();

    Matrix C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double c = covariance(spec, mesh.node(i), mesh.node(j)) * sw[i] * sw[j];
            C(i, j) = c;
            C(j, i) = c;
        }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    if (eig.info() != Eigen::Success) throw std::runtime_error("kl_decompose: eigensolve failed");

    // Eigen returns ascending order.
    Vector lambda = eig.eigenvalues().reverse();
    Matrix V = eig.eigenvectors().rowwise().reverse();
    if (!(lambda[m - 1] > 0.0)) throw std::runtime_error("kl_decompose: truncation exceeds numerical rank");

    Vector probe(n);
    for (int id = 0; id < n; ++id) {
        const fem::Point p = mesh.node(id);
        probe[id] = (1.0 + p.x + 2.0 * p.y) * sw[id];
    }
    std::vector<int> swap(static_cast<std::size_t>(n));
    for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) swap[std::size_t(mesh.node_id(a, b))] = mesh.node_id(b, a);

    for (int j = 0; j < m;) {
        int k = j + 1;
        while (k < n && std::abs(lambda[k] - lambda[j]) <= kDegenerateTol * std::abs(lambda[0])) ++k;
        if (k - j == 2) {
            Matrix S(2, 2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    double s = 0.0;
                    for (int id = 0; id < n; ++id) s += V(id, j + r) * V(swap[std::size_t(id)], j + c);
                    S(r, c) = s;
                }
            S = 0.5 * (S + S.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Matrix> rot(S);
            const Matrix pair = V.middleCols(j, 2) * rot.eigenvectors();  // odd part first
            V.middleCols(j, 2) = pair;
        }
        for (int c = j; c < k && c < n; ++c) fix_sign(V.col(c), probe);
        j = k;
    }

    KlBasis basis;
    basis.num_nodes = n;
    basis.quad_weights = w;
    basis.all_eigenvalues = lambda;
    basis.modes.resize(n, m);
    for (int j = 0; j < m; ++j) basis.modes.col(j) = V.col(j).cwiseQuotient(sw) * std::sqrt(lambda[j]);
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += std::max(lambda[j], 0.0);
    basis.captured_fraction = lambda.head(m).sum() / total;
    return basis;
}

Vector field_from_params(const KlBasis& basis, const Vector& theta)
{
    if (theta.size() != basis.modes.cols()) throw std::invalid_argument("field_from_params: dimension mismatch");
    return basis.modes * theta;
}

void write_eigenvalues_csv(const std::string& path, const KlBasis& basis, const std::vector<std::string>& metadata)
{
    auto meta = metadata;
    meta.push_back("captured_fraction=" + io::format_double(basis.captured_fraction));
    meta.push_back("truncation=" + std::to_string(basis.truncation()));
    io::CsvWriter csv(path, meta, {"j", "eigenvalue", "cumulative_fraction"});
    double total = 0.0;
    for (Eigen::Index j = 0; j < basis.all_eigenvalues.size(); ++j) total += std::max(basis.all_eigenvalues[j], 0.0);
    double cum = 0.0;
    for (Eigen::Index j = 0; j < basis.all_eigenvalues.size(); ++j) {
        cum += std::max(basis.all_eigenvalues[j], 0.0);
        csv.cell(int(j + 1)).cell(basis.all_eigenvalues[j]).cell(cum / total);
        csv.end_row();
    }
}

void write_basis_csv(const std::string& path, const KlBasis& basis, const std::vector<std::string>& metadata)
{
    std::vector<std::string> header{"node"};
    for (int j = 0; j < basis.truncation(); ++j) header.push_back("mode" + std::to_string(j + 1));
    io::CsvWriter csv(path, metadata, header);
    for (int id = 0; id < basis.num_nodes; ++id) {
        csv.cell(id);
        for (int j = 0; j < basis.truncation(); ++j) csv.cell(basis.modes(id, j));
        csv.end_row();
    }
}

}  // namespace chaos::field
