#pragma once

// Squared-exponential Gaussian field on the mesh nodes, truncated
// Karhunen-Loeve expansion Y = U theta.

#include <string>
#include <vector>

#include "chaos/fem.hpp"

namespace chaos::field {

/// R(x, y) = s1^2 s2^2 exp(-(x1-y1)^2 / l1 - (x2-y2)^2 / l2).
/// l1, l2 enter undivided (they are squared lengths).
struct CovarianceSpec {
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double l1 = 1.0;
    double l2 = 1.0;

    void validate() const;
};

[[nodiscard]] double covariance(const CovarianceSpec& spec, fem::Point x, fem::Point y);

struct KlBasis {
    int num_nodes = 0;
    Vector quad_weights;  // Nystrom weights per node (trapezoid rule on the grid)
    Vector all_eigenvalues;  // descending, every retained and discarded mode
    Matrix modes;  // num_nodes x m, column j = eigenfunction j scaled by sqrt(lambda_j)
    double captured_fraction = 0.0;

    [[nodiscard]] int truncation() const { return int(modes.cols()); }
    [[nodiscard]] Vector eigenvalues() const { return all_eigenvalues.head(modes.cols()); }
};

/// Nystrom discretization of the covariance operator on all mesh nodes with
/// trapezoid weights, symmetric eigensolve, top-m modes kept.
///
/// Modes are made reproducible: each column is signed so that its inner
/// product with 1 + x + 2y is positive, and a pair sharing one eigenvalue is
/// rotated into the part odd under the swap x <-> y followed by the even part.
[[nodiscard]] KlBasis kl_decompose(const CovarianceSpec& spec, const fem::Mesh& mesh, int m);

/// Nodal log-permeability U theta.
[[nodiscard]] Vector field_from_params(const KlBasis& basis, const Vector& theta);

void write_eigenvalues_csv(const std::string& path, const KlBasis& basis,
                           const std::vector<std::string>& metadata = {});
/// One row per node: node id, then the m mode values.
void write_basis_csv(const std::string& path, const KlBasis& basis, const std::vector<std::string>& metadata = {});

}  // namespace chaos::field
