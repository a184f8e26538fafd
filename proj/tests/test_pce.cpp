#include <doctest.h>

#include <filesystem>
#include <random>

#include "chaos/pce.hpp"

using namespace chaos;

namespace {

Vector poly_stub(const Vector& t)
{
    Vector out(3);
    out[0] = 1.0 + 2.0 * t[0] - t[1] * t[2];
    out[1] = t[0] * t[0] * t[1] - 3.0 * std::pow(t[2], 4) + 0.5;
    out[2] = std::pow(t[0], 2) * std::pow(t[1], 2) - t[2];
    return out;
}

}  // namespace

TEST_SUITE("pce") {

TEST_CASE("polynomial stubs are reproduced")
{
    const auto model = pce::build_pce(poly_stub, 3, 4);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.5);
    for (int k = 0; k < 50; ++k) {
        const Vector t = Vector::NullaryExpr(3, [&](Eigen::Index) { return g(rng); });
        const Vector ref = poly_stub(t);
        const Vector got = pce::evaluate_pce(model, t);
        CHECK((got - ref).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("linear map gives degree one coefficients")
{
    const ForwardMap lin = [](const Vector& t) { return Vector::Constant(1, 2.0 + 3.0 * t[0] - t[1]); };
    const auto model = pce::build_pce(lin, 2, 2);
    CHECK(model.coefficients(0, 0) == doctest::Approx(2.0));
    CHECK(model.coefficients(1, 0) == doctest::Approx(3.0));
    CHECK(model.coefficients(2, 0) == doctest::Approx(-1.0));
    for (Eigen::Index i = 3; i < model.coefficients.rows(); ++i)
        CHECK(std::abs(model.coefficients(i, 0)) < 1e-13);
}

TEST_CASE("forward call counts")
{
    for (auto [order, count] : {std::pair{4, 216}, std::pair{8, 1000}}) {
        std::atomic<int> calls{0};
        const ForwardMap f = [&](const Vector& t) {
            ++calls;
            return Vector::Constant(1, t.sum());
        };
        const auto model = pce::build_pce(f, 3, order);
        CHECK(calls == count);
        CHECK(model.provenance.forward_solves == std::uint64_t(count));
        CHECK(model.provenance.quad_points == order + 2);
        CHECK(model.indices.size() == basis_size(3, order));
    }
}

TEST_CASE("odd and negative orders rejected")
{
    CHECK_THROWS_AS((void)pce::build_pce(poly_stub, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)pce::build_pce(poly_stub, 3, -2), std::invalid_argument);
}

TEST_CASE("failing forward map reports the node")
{
    const ForwardMap f = [](const Vector& t) -> Vector {
        if (t[0] > 2.0) throw std::runtime_error("boom");
        return Vector::Constant(1, 1.0);
    };
    CHECK_THROWS_AS((void)pce::build_pce(f, 2, 4), pce::ForwardFailure);
    try {
        (void)pce::build_pce(f, 2, 4, {Execution::Serial, kDefaultTensorBudget});
    } catch (const pce::ForwardFailure& e) {
        CHECK(e.theta[0] > 2.0);
    }
}

TEST_CASE("serial and parallel builds agree bit for bit")
{
    const auto fwd = make_default_forward();
    const auto a = pce::build_pce(fwd.as_map(), 3, 4, {Execution::Parallel, kDefaultTensorBudget});
    const auto b = pce::build_pce_serial(fwd.as_map(), 3, 4);
    CHECK(a.coefficients == b.coefficients);
}

TEST_CASE("elliptic surrogate accuracy and save/load")
{
    const auto fwd = make_default_forward();
    const auto before = fem::solve_count();
    const auto model = pce::build_pce(fwd.as_map(), 3, 8);
    CHECK(fem::solve_count() - before == 1000);

    Vector t(3);
    t << -3, -1, 1;
    CHECK(pce::relative_error_at(model, fwd, t, {0.5, 0.5625}) < 0.1);
    CHECK_THROWS_AS((void)pce::relative_error_at(model, fwd, t, {0.51, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS((void)pce::relative_error_at(model, fwd, t, {0.0, 0.5}), std::domain_error);

    const auto decay = pce::coefficient_decay(model);
    REQUIRE(decay.size() == 9);
    CHECK(decay[8] < decay[0]);

    const auto path = (std::filesystem::temp_directory_path() / "chaos_pce_test.csv").string();
    pce::save_pce(path, model, {"test"});
    const auto back = pce::load_pce(path);
    CHECK(back.order == 8);
    CHECK(back.dim == 3);
    CHECK(back.provenance.forward_solves == 1000);
    CHECK(back.coefficients == model.coefficients);
}

TEST_CASE("basis values follow index order")
{
    const auto model = pce::build_pce(poly_stub, 3, 2);
    Vector t(3);
    t << 0.3, -0.7, 1.1;
    const Vector phi = pce::basis_values(model, t);
    for (std::size_t i = 0; i < model.indices.size(); ++i)
        CHECK(phi[Eigen::Index(i)] == doctest::Approx(phi_eval(model.indices[i], t)));
    CHECK_THROWS_AS((void)pce::evaluate_pce(model, Vector::Zero(2)), std::invalid_argument);
}

}  // TEST_SUITE
