#pragma once

// Normalized probabilists' Hermite polynomials, the multivariate tensor basis
// over multi-indices, and Gauss-Hermite rules for the standard Gaussian weight.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "chaos/common.hpp"

namespace chaos {

/// One multivariate basis label (i_1, ..., i_m).
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);

    [[nodiscard]] std::size_t dim() const { return entries_.size(); }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int operator[](std::size_t k) const { return entries_[k]; }
    [[nodiscard]] const std::vector<int>& entries() const { return entries_; }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }

private:
    std::vector<int> entries_;
    int degree_ = 0;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// m-dimensional product rule; node k occupies row k of `nodes`.
struct TensorRule {
    std::size_t dim = 0;
    Matrix nodes;  // q^m x m
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// H_k(x), orthonormal under N(0,1): E[H_j H_k] = delta_jk.
[[nodiscard]] double hermite_eval(int k, double x);

/// H_0(x), ..., H_k(x) in one recurrence sweep.
void hermite_eval_all(int k, double x, std::vector<double>& out);

/// Number of multi-indices with |i| <= order in `dim` variables, binomial(order+dim, dim).
/// Throws std::overflow_error when the count does not fit in std::size_t.
[[nodiscard]] std::size_t basis_size(int dim, int order);

/// All multi-indices with |i| <= order, ordered by total degree and, within a
/// degree, by descending lexicographic order. The first entry is the zero
/// index and the unit indices follow as e_1, ..., e_m.
[[nodiscard]] std::vector<MultiIndex> multi_indices(int dim, int order);

/// Phi_i(theta) = H_{i_1}(theta_1) ... H_{i_m}(theta_m).
[[nodiscard]] double phi_eval(const MultiIndex& index, const Vector& theta);

/// q-point Gauss-Hermite rule for N(0,1) via the Golub-Welsch eigenproblem.
/// Nodes ascending, weights summing to one.
[[nodiscard]] QuadratureRule gauss_hermite_rule(int q);

inline constexpr std::size_t kDefaultTensorBudget = 1'000'000;

/// Product of `dim` copies of the q-point rule, odometer order with the last
/// dimension varying fastest.
[[nodiscard]] TensorRule tensor_rule(int dim, int q, std::size_t budget = kDefaultTensorBudget);

}  // namespace chaos
