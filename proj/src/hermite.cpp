#include "chaos/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace chaos {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries))
{
    for (int e : entries_) {
        if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
        degree_ += e;
    }
}

double hermite_eval(int k, double x)
{
    if (k < 0) throw std::invalid_argument("hermite_eval: negative order");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int j = 1; j < k; ++j) {
        const double next = (x * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

void hermite_eval_all(int k, double x, std::vector<double>& out)
{
    if (k < 0) throw std::invalid_argument("hermite_eval_all: negative order");
    out.resize(std::size_t(k) + 1);
    out[0] = 1.0;
    if (k == 0) return;
    out[1] = x;
    for (int j = 1; j < k; ++j)
        out[j + 1] = (x * out[j] - std::sqrt(double(j)) * out[j - 1]) / std::sqrt(double(j + 1));
}

std::size_t basis_size(int dim, int order)
{
    if (dim < 1) throw std::invalid_argument("basis_size: dimension must be >= 1");
    if (order < 0) throw std::invalid_argument("basis_size: order must be >= 0");
    // binomial(order + dim, dim) as a running product of binomials; the
    // 128-bit intermediate keeps result * factor exact before the division.
    const std::size_t n = std::size_t(order) + std::size_t(dim);
    const std::size_t k = std::min<std::size_t>(std::size_t(dim), std::size_t(order));
    unsigned __int128 result = 1;
    for (std::size_t j = 1; j <= k; ++j) {
        result = result * (n - k + j) / j;
        if (result > std::numeric_limits<std::size_t>::max())
            throw std::overflow_error("basis_size: index count overflows");
    }
    return std::size_t(result);
}

namespace {

// Enumerate all compositions of `total` into `dim` nonnegative parts in
// descending lexicographic order.
void compositions(int dim, int total, std::vector<int>& cur, std::size_t pos, std::vector<MultiIndex>& out)
{
    if (pos + 1 == std::size_t(dim)) {
        cur[pos] = total;
        out.emplace_back(cur);
        return;
    }
    for (int v = total; v >= 0; --v) {
        cur[pos] = v;
        compositions(dim, total - v, cur, pos + 1, out);
    }
}

}  // namespace

std::vector<MultiIndex> multi_indices(int dim, int order)
{
    const std::size_t count = basis_size(dim, order);
    std::vector<MultiIndex> out;
    out.reserve(count);
    std::vector<int> cur(std::size_t(dim), 0);
    for (int total = 0; total <= order; ++total) compositions(dim, total, cur, 0, out);
    return out;
}

double phi_eval(const MultiIndex& index, const Vector& theta)
{
    if (index.dim() != std::size_t(theta.size()))
        throw std::invalid_argument("phi_eval: dimension mismatch");
    double p = 1.0;
    for (std::size_t k = 0; k < index.dim(); ++k) p *= hermite_eval(index[k], theta[Eigen::Index(k)]);
    return p;
}

QuadratureRule gauss_hermite_rule(int q)
{
    if (q < 1) throw std::invalid_argument("gauss_hermite_rule: q must be >= 1");
    // Jacobi matrix of the orthonormal recurrence: zero diagonal, sqrt(k) off it.
    Vector diag = Vector::Zero(q);
    Vector sub(std::max(q - 1, 0));
    for (int k = 1; k < q; ++k) sub[k - 1] = std::sqrt(double(k));

    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite_rule: tridiagonal eigensolve did not converge");

    QuadratureRule rule;
    rule.nodes.resize(std::size_t(q));
    rule.weights.resize(std::size_t(q));
    for (int k = 0; k < q; ++k) {
        rule.nodes[std::size_t(k)] = eig.eigenvalues()[k];
        const double v0 = eig.eigenvectors()(0, k);
        rule.weights[std::size_t(k)] = v0 * v0;
    }
    // Symmetrize about zero so the rule is exactly odd/even invariant.
    for (int k = 0; k < q / 2; ++k) {
        const auto a = std::size_t(k), b = std::size_t(q - 1 - k);
        const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
        const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
        rule.nodes[a] = -x;
        rule.nodes[b] = x;
        rule.weights[a] = rule.weights[b] = w;
    }
    if (q % 2 == 1) rule.nodes[std::size_t(q / 2)] = 0.0;
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights) w /= total;
    return rule;
}

TensorRule tensor_rule(int dim, int q, std::size_t budget)
{
    if (dim < 1) throw std::invalid_argument("tensor_rule: dimension must be >= 1");
    const QuadratureRule base = gauss_hermite_rule(q);
    std::size_t count = 1;
    for (int d = 0; d < dim; ++d) {
        if (count > budget / std::size_t(q)) throw std::length_error("tensor_rule: node budget exceeded");
        count *= std::size_t(q);
    }

    TensorRule rule;
    rule.dim = std::size_t(dim);
    rule.nodes.resize(Eigen::Index(count), dim);
    rule.weights.resize(count);
    std::vector<int> odo(std::size_t(dim), 0);
    for (std::size_t k = 0; k < count; ++k) {
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            rule.nodes(Eigen::Index(k), d) = base.nodes[std::size_t(odo[std::size_t(d)])];
            w *= base.weights[std::size_t(odo[std::size_t(d)])];
        }
        rule.weights[k] = w;
        for (int d = dim - 1; d >= 0; --d) {
            if (++odo[std::size_t(d)] < q) break;
            odo[std::size_t(d)] = 0;
        }
    }
    return rule;
}

}  // namespace chaos
