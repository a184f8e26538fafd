#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "chaos/fem.hpp"
#include "oracles.hpp"

using namespace chaos;

TEST_SUITE("fem") {

TEST_CASE("mesh numbering")
{
    const fem::Mesh mesh(16);
    CHECK(mesh.num_nodes() == 289);
    CHECK(mesh.num_interior() == 225);
    CHECK(mesh.num_triangles() == 512);
    CHECK(mesh.node_id(2, 3) == 2 * 17 + 3);
    CHECK(mesh.node(mesh.node_id(8, 9)).x == doctest::Approx(0.5));
    CHECK(mesh.node(mesh.node_id(8, 9)).y == doctest::Approx(0.5625));
    CHECK(mesh.on_boundary(mesh.node_id(0, 5)));
    CHECK(mesh.on_boundary(mesh.node_id(16, 16)));
    CHECK_FALSE(mesh.on_boundary(mesh.node_id(1, 1)));
    for (int k = 0; k < mesh.num_interior(); ++k) CHECK(mesh.interior_index(mesh.node_of_interior(k)) == k);
    CHECK_THROWS((void)fem::Mesh(1));
}

TEST_CASE("triangles cover the square")
{
    const fem::Mesh mesh(8);
    double area = 0;
    for (const auto& t : mesh.triangles()) {
        const auto a = mesh.node(t[0]), b = mesh.node(t[1]), c = mesh.node(t[2]);
        const double s = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        CHECK(s > 0);
        area += s;
    }
    CHECK(area == doctest::Approx(1.0));
}

TEST_CASE("stiffness is symmetric with positive diagonal")
{
    const fem::Mesh mesh(8);
    Vector y(mesh.num_nodes());
    for (int id = 0; id < mesh.num_nodes(); ++id) y[id] = std::sin(3.0 * mesh.node(id).x) - mesh.node(id).y;
    const auto p = fem::assemble(mesh, y);
    const int n = mesh.num_interior();
    for (int r = 0; r < n; ++r) {
        CHECK(p.op.at(r, r) > 0);
        for (int c = 0; c < n; ++c) CHECK(p.op.at(r, c) == doctest::Approx(p.op.at(c, r)).epsilon(1e-14));
    }
    Vector x = Vector::LinSpaced(n, -1.0, 2.0);
    CHECK(x.dot(p.op.multiply(x)) > 0);
}

TEST_CASE("manufactured solution, error and convergence rate")
{
    const double e8 = oracle::poisson_rel_l2(8);
    const double e16 = oracle::poisson_rel_l2(16);
    CHECK(e16 <= 0.01);
    CHECK(e8 / e16 == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("constant log-permeability scales the solution")
{
    const fem::Mesh mesh(16);
    const Vector u0 = fem::solve(fem::assemble(mesh, Vector::Zero(mesh.num_nodes()))).values;
    const Vector u2 = fem::solve(fem::assemble(mesh, Vector::Constant(mesh.num_nodes(), 2.0))).values;
    CHECK((u2 * std::exp(2.0) - u0).cwiseAbs().maxCoeff() < 1e-8 * u0.cwiseAbs().maxCoeff());
}

TEST_CASE("solve is deterministic and counted")
{
    const fem::Mesh mesh(16);
    const auto p = fem::assemble(mesh, Vector::Constant(mesh.num_nodes(), -0.5));
    const auto before = fem::solve_count();
    const auto a = fem::solve(p), b = fem::solve(p);
    CHECK(fem::solve_count() - before == 2);
    CHECK(a.values == b.values);
    CHECK(a.rel_residual <= 1e-10);
}

TEST_CASE("solver reports non-convergence")
{
    const fem::Mesh mesh(16);
    fem::SolverSettings s;
    s.max_iterations = 2;
    CHECK_THROWS_AS((void)fem::solve(fem::assemble(mesh, Vector::Zero(mesh.num_nodes()), s)), fem::SolveError);
}

TEST_CASE("assemble input validation")
{
    const fem::Mesh mesh(4);
    CHECK_THROWS_AS((void)fem::assemble(mesh, Vector::Zero(3)), std::invalid_argument);
    Vector y = Vector::Zero(mesh.num_nodes());
    y[3] = std::nan("");
    CHECK_THROWS_AS((void)fem::assemble(mesh, y), std::invalid_argument);
}

TEST_CASE("observation layout")
{
    const fem::Mesh mesh(16);
    const auto obs = fem::default_observation(mesh);
    REQUIRE(obs.size() == 16);
    CHECK(obs.node_ids().front() == mesh.node_id(5, 5));
    CHECK(obs.node_ids()[1] == mesh.node_id(5, 7));
    CHECK(obs.node_ids().back() == mesh.node_id(11, 11));
    Vector u = Vector::LinSpaced(mesh.num_interior(), 0.0, 1.0);
    const Vector g = obs.apply(u);
    for (std::size_t k = 0; k < obs.size(); ++k)
        CHECK(g[Eigen::Index(k)] == u[mesh.interior_index(obs.node_ids()[k])]);
    CHECK_THROWS((void)fem::default_observation(fem::Mesh(8)));
    CHECK_THROWS((void)fem::ObservationOperator(mesh, {0}));
}

TEST_CASE("point evaluation")
{
    const fem::Mesh mesh(16);
    Vector u(mesh.num_interior());
    for (int k = 0; k < u.size(); ++k) {
        const auto p = mesh.node(mesh.node_of_interior(k));
        u[k] = p.x * p.y;
    }
    CHECK(fem::eval_at_point(mesh, u, {0.5, 0.5625}) == doctest::Approx(0.28125));
    // linear in x along an edge row
    CHECK(fem::eval_at_point(mesh, u, {0.53125, 0.5}) == doctest::Approx(0.265625));
    CHECK_THROWS_AS((void)fem::eval_at_point(mesh, u, {1.5, 0.5}), std::out_of_range);
}

TEST_CASE("nodal csv round trip")
{
    const fem::Mesh mesh(4);
    Vector v = Vector::LinSpaced(mesh.num_nodes(), -3.0, 7.123456789012345);
    const auto path = (std::filesystem::temp_directory_path() / "chaos_nodal_test.csv").string();
    fem::write_nodal_csv(path, mesh, v, {"test"});
    CHECK(fem::read_nodal_csv(path, mesh) == v);
}

}  // TEST_SUITE
