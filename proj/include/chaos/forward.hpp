#pragma once

#include <functional>

#include "chaos/fem.hpp"
#include "chaos/gauss_field.hpp"

namespace chaos {

/// Parameter-to-output map theta -> vector.
using ForwardMap = std::function<Vector(const Vector&)>;

/// theta -> interior FEM solution of the elliptic problem with Y = U theta.
/// Each call performs exactly one PDE solve.
class EllipticForward {
public:
    EllipticForward(fem::Mesh mesh, field::KlBasis basis, fem::SolverSettings settings = {});

    [[nodiscard]] Vector operator()(const Vector& theta) const;
    [[nodiscard]] fem::Solution solve(const Vector& theta) const;

    [[nodiscard]] const fem::Mesh& mesh() const { return mesh_; }
    [[nodiscard]] const field::KlBasis& basis() const { return basis_; }
    [[nodiscard]] int dim() const { return basis_.truncation(); }
    [[nodiscard]] int output_dim() const { return mesh_.num_interior(); }
    [[nodiscard]] ForwardMap as_map() const;

private:
    fem::Mesh mesh_;
    field::KlBasis basis_;
    fem::SolverSettings settings_;
};

inline constexpr int kDefaultCellsPerSide = 16;
inline constexpr int kDefaultKlModes = 3;

/// 16x16-cell mesh, unit covariance parameters, three KL modes.
[[nodiscard]] EllipticForward make_default_forward(int m = kDefaultKlModes, int cells_per_side = kDefaultCellsPerSide);

}  // namespace chaos
