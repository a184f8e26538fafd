#pragma once

// P1 finite elements for -div(exp(Y) grad u) = f on the unit square with
// homogeneous Dirichlet data, f(x) = pi^2 sin(pi x1) sin(pi x2).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaos/hermite.hpp"

namespace chaos::fem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform triangulation of [0,1]^2. Node (a, b) sits at (a h, b h) and has
/// global id a * (cells_per_side + 1) + b, i.e. the y index runs fastest.
/// Each square cell is split along its lower-left to upper-right diagonal.
class Mesh {
public:
    explicit Mesh(int cells_per_side);

    [[nodiscard]] int cells_per_side() const { return cells_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] int nodes_per_side() const { return cells_ + 1; }
    [[nodiscard]] int num_nodes() const { return (cells_ + 1) * (cells_ + 1); }
    [[nodiscard]] int num_interior() const { return (cells_ - 1) * (cells_ - 1); }
    [[nodiscard]] int num_triangles() const { return int(triangles_.size()); }

    [[nodiscard]] int node_id(int a, int b) const { return a * (cells_ + 1) + b; }
    [[nodiscard]] Point node(int id) const;
    [[nodiscard]] Point node(int a, int b) const { return {a * h_, b * h_}; }
    [[nodiscard]] bool on_boundary(int id) const;

    /// Interior numbering (a-1)*(n-1) + (b-1); -1 for boundary nodes.
    [[nodiscard]] int interior_index(int id) const { return interior_of_node_[std::size_t(id)]; }
    [[nodiscard]] int node_of_interior(int k) const { return node_of_interior_[std::size_t(k)]; }

    [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

    /// Scatter an interior vector to all nodes, zero on the boundary.
    [[nodiscard]] Vector to_nodal(const Vector& interior) const;

private:
    int cells_;
    double h_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<int> interior_of_node_;
    std::vector<int> node_of_interior_;
};

[[nodiscard]] Mesh build_mesh(int cells_per_side);

/// Compressed sparse rows over the interior unknowns.
struct SparseMatrix {
    int rows = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols;
    std::vector<double> values;

    [[nodiscard]] Vector multiply(const Vector& x) const;
    [[nodiscard]] double at(int r, int c) const;
    [[nodiscard]] Vector diagonal() const;
};

enum class Preconditioner { Jacobi };

struct SolverSettings {
    double rel_tolerance = 1e-10;
    int max_iterations = 0;  // 0: ten times the number of unknowns
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct FemProblem {
    const Mesh* mesh = nullptr;
    Vector nodal_log_perm;
    SparseMatrix op;
    Vector load;
    SolverSettings settings;
};

struct Solution {
    Vector values;  // interior nodes, interior numbering
    int iterations = 0;
    double rel_residual = 0.0;
};

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] double source_term(Point p);

/// Assemble the stiffness matrix and load with the 3-point mid-edge rule.
/// The coefficient at a quadrature point is exp of the linearly interpolated Y.
/// The referenced mesh must outlive the problem.
[[nodiscard]] FemProblem assemble(const Mesh& mesh, const Vector& nodal_log_perm, SolverSettings settings = {});

/// Jacobi-preconditioned conjugate gradients. Every call bumps the global
/// solve counter by one, including calls that end in SolveError.
[[nodiscard]] Solution solve(const FemProblem& problem);

/// Global, thread-safe count of calls to solve().
[[nodiscard]] std::uint64_t solve_count();
void reset_solve_count();

/// Selects n observed interior nodes and projects interior vectors onto them.
class ObservationOperator {
public:
    ObservationOperator(const Mesh& mesh, std::vector<int> node_ids);

    [[nodiscard]] std::size_t size() const { return interior_.size(); }
    [[nodiscard]] const std::vector<int>& node_ids() const { return nodes_; }
    [[nodiscard]] const std::vector<int>& interior_indices() const { return interior_; }
    [[nodiscard]] Vector apply(const Vector& interior_values) const;

private:
    std::vector<int> nodes_;
    std::vector<int> interior_;
};

/// 4x4 block of nodes at grid steps {5,7,9,11} in each direction, ordered
/// with the x step outer and the y step inner.
[[nodiscard]] ObservationOperator default_observation(const Mesh& mesh);

/// Piecewise-linear interpolation of an interior solution at x in [0,1]^2.
[[nodiscard]] double eval_at_point(const Mesh& mesh, const Vector& interior_values, Point x);

/// "x,y,value" rows over all mesh nodes.
void write_nodal_csv(const std::string& path, const Mesh& mesh, const Vector& nodal,
                     const std::vector<std::string>& metadata = {});
[[nodiscard]] Vector read_nodal_csv(const std::string& path, const Mesh& mesh);

/// Nodal field as a (n+1) x (n+1) grid: header "y\x,<x values>", one row per y.
void write_grid_csv(const std::string& path, const Mesh& mesh, const Vector& nodal,
                    const std::vector<std::string>& metadata = {});

}  // namespace chaos::fem
