#pragma once

// Truncated Hermite chaos of a vector-valued map, built by tensor
// Gauss-Hermite collocation with N+2 points per parameter.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaos/forward.hpp"
#include "chaos/hermite.hpp"

namespace chaos::pce {

struct Provenance {
    int quad_points = 0;
    std::uint64_t forward_solves = 0;
};

struct PceModel {
    int dim = 0;
    int order = 0;
    std::vector<MultiIndex> indices;
    Matrix coefficients;  // one row per multi-index, one column per output
    Provenance provenance;

    [[nodiscard]] int output_dim() const { return int(coefficients.cols()); }
};

struct BuildOptions {
    Execution execution = Execution::Parallel;
    std::size_t budget = kDefaultTensorBudget;
};

/// A forward evaluation at one collocation node threw.
class ForwardFailure : public std::runtime_error {
public:
    ForwardFailure(std::size_t node, Vector theta, const std::string& what);
    std::size_t node;
    Vector theta;
};

/// a_i = sum_k w_k h(x_k) Phi_i(x_k) over the (order+2)^dim tensor rule. The
/// forward map is called once per node (in parallel when requested) and the
/// reduction runs in node order afterwards, so both executions agree bit for bit.
[[nodiscard]] PceModel build_pce(const ForwardMap& forward, int dim, int order, BuildOptions options = {});

/// Serial reference for build_pce.
[[nodiscard]] inline PceModel build_pce_serial(const ForwardMap& forward, int dim, int order)
{
    return build_pce(forward, dim, order, {Execution::Serial, kDefaultTensorBudget});
}

[[nodiscard]] Vector evaluate_pce(const PceModel& model, const Vector& theta);

/// Basis values Phi_i(theta) in model index order.
[[nodiscard]] Vector basis_values(const PceModel& model, const Vector& theta);

/// 100 |u_fem(x) - u_pce(x)| / |u_fem(x)| at mesh node x. Performs one FEM solve.
[[nodiscard]] double relative_error_at(const PceModel& model, const EllipticForward& forward, const Vector& theta,
                                       fem::Point x);

/// Largest coefficient magnitude among indices of each total degree 0..order.
[[nodiscard]] std::vector<double> coefficient_decay(const PceModel& model);

/// Coefficient table as CSV (index tuple, then outputs) plus "<path>.provenance".
void save_pce(const std::string& path, const PceModel& model, const std::vector<std::string>& metadata = {});
[[nodiscard]] PceModel load_pce(const std::string& path);

}  // namespace chaos::pce
