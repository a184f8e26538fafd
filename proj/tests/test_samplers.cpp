#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chaos/samplers.hpp"

using namespace chaos;
using namespace chaos::samplers;

namespace {

// F = (x - m)^T A (x - m) / 2
Objective quadratic(const Matrix& A, const Vector& m)
{
    return [A, m](const Vector& x) { return 0.5 * (x - m).dot(A * (x - m)); };
}

Matrix spd3()
{
    Matrix A(3, 3);
    A << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
    return A;
}

Vector vec3(double a, double b, double c)
{
    Vector v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("finite difference derivatives")
{
    const Objective F = [](const Vector& x) { return std::sin(x[0]) * x[1] * x[1] + std::exp(0.3 * x[0]); };
    const Vector x = vec3(0.4, -1.2, 0).head(2);
    const double f0 = F(x);
    Vector g(2);
    g << std::cos(0.4) * 1.44 + 0.3 * std::exp(0.12), 2 * std::sin(0.4) * -1.2;
    CHECK((forward_gradient(F, x, f0, 1e-6) - g).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((central_gradient(F, x, 1e-5) - g).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix H = fd_hessian(F, x, f0, 1e-4);
    CHECK(H(0, 1) == doctest::Approx(H(1, 0)));
    CHECK(H(0, 1) == doctest::Approx(2 * std::cos(0.4) * -1.2).epsilon(1e-5));
    CHECK(H(1, 1) == doctest::Approx(2 * std::sin(0.4)).epsilon(1e-5));
}

TEST_CASE("mode of a quadratic")
{
    const Matrix A = spd3();
    const Vector m = vec3(1, -2, 0.5);
    const auto r = find_mode(quadratic(A, m), Vector::Zero(3));
    CHECK((r.mode - m).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((r.hessian - A).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(r.value < 1e-14);
    CHECK(r.eval_count > 0);
}

TEST_CASE("mode of a curved valley")
{
    const Objective F = [](const Vector& x) {
        return 50 * std::pow(x[1] - x[0] * x[0], 2) + 0.5 * std::pow(1 - x[0], 2);
    };
    const auto r = find_mode(F, Vector::Zero(2));
    CHECK(r.mode[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.mode[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("mode finder survives regions where F is undefined")
{
    const Objective F = [](const Vector& x) {
        if (x[0] < -1.0) throw std::runtime_error("outside");
        return 0.5 * (x[0] - 3) * (x[0] - 3) + 0.5 * x[1] * x[1];
    };
    const auto r = find_mode(F, Vector::Constant(2, -0.5));
    CHECK(r.mode[0] == doctest::Approx(3.0).epsilon(1e-7));
    const Objective bad = [](const Vector&) { return std::nan(""); };
    CHECK_THROWS_AS((void)find_mode(bad, Vector::Zero(2)), OptimizationError);
}

TEST_CASE("weights are uniform for a quadratic objective")
{
    const Matrix A = spd3();
    const Vector m = vec3(-0.3, 2, 1);
    const auto F = quadratic(A, m);
    const auto mode = find_mode(F, Vector::Zero(3));
    const auto ens = implicit_sample(F, mode, 200, 17);
    REQUIRE(ens.weights.size() == 200);
    for (double w : ens.weights) CHECK(std::abs(w - 1.0 / 200) < 1e-10);
    CHECK(ens.ess == doctest::Approx(200.0));
    CHECK_FALSE(ens.degenerate);
    CHECK(ens.eval_count == mode.eval_count + 200);
}

TEST_CASE("implicit sampling serial and parallel agree")
{
    const Objective F = [](const Vector& x) { return 0.5 * x.squaredNorm() + 0.1 * std::pow(x[0], 4); };
    const auto mode = find_mode(F, Vector::Constant(2, 1.0));
    const auto a = implicit_sample(F, mode, 64, 5, Execution::Serial);
    const auto b = implicit_sample(F, mode, 64, 5, Execution::Parallel);
    CHECK(a.weights == b.weights);
    for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k] == b.samples[k]);
    const auto c = implicit_sample(F, mode, 64, 6, Execution::Serial);
    CHECK(c.samples[0] != a.samples[0]);
}

TEST_CASE("implicit sampling recovers a non-Gaussian mean")
{
    // p(x) ~ exp(-x^2/2 - x^4/4 + x): mean by 1-d quadrature
    const Objective F = [](const Vector& x) { return 0.5 * x[0] * x[0] + 0.25 * std::pow(x[0], 4) - x[0]; };
    double z = 0, m1 = 0;
    for (int k = -8000; k <= 8000; ++k) {
        const double x = k * 1e-3, p = std::exp(-F(Vector::Constant(1, x)));
        z += p;
        m1 += x * p;
    }
    const auto mode = find_mode(F, Vector::Zero(1));
    const auto ens = implicit_sample(F, mode, 20'000, 23);
    CHECK(conditional_mean(ens)[0] == doctest::Approx(m1 / z).epsilon(0.01));
}

TEST_CASE("conditional mean is invariant to sample order")
{
    WeightedEnsemble e;
    e.samples = {vec3(1, 0, 0), vec3(0, 2, 0), vec3(0, 0, 3)};
    e.weights = {0.5, 0.25, 0.25};
    const Vector m = conditional_mean(e);
    CHECK((m - vec3(0.5, 0.5, 0.75)).norm() < 1e-15);
    std::reverse(e.samples.begin(), e.samples.end());
    std::reverse(e.weights.begin(), e.weights.end());
    CHECK((conditional_mean(e) - m).norm() < 1e-15);
    CHECK(estimation_error(m, vec3(0.5, 0.5, 0.75)) == 0.0);
    CHECK(estimation_error(vec3(3, 4, 0), Vector::Zero(3)) == doctest::Approx(5.0));
}

TEST_CASE("Metropolis acceptance rule")
{
    CHECK(metropolis_acceptance(2.0, 1.0) == 1.0);
    CHECK(metropolis_acceptance(1.0, 3.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(metropolis_acceptance(1.0, std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("Metropolis reproduces a standard normal")
{
    const Objective F = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
    const auto chain = rw_metropolis(F, Vector::Zero(1), 100'000, 2.4, 99);
    REQUIRE(chain.states.size() == 100'000);
    double s = 0, s2 = 0;
    for (const auto& x : chain.states) {
        s += x[0];
        s2 += x[0] * x[0];
    }
    const double n = double(chain.states.size());
    const double var = s2 / n - (s / n) * (s / n);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    CHECK(chain.acceptance_rate > 0.2);
    CHECK(chain.acceptance_rate < 0.7);
    CHECK(chain.eval_count == 100'001);
}

TEST_CASE("chain mean drops the burn-in")
{
    Chain c;
    for (int k = 0; k < 10; ++k) c.states.push_back(Vector::Constant(1, k < 2 ? 100.0 : 1.0));
    CHECK(chain_mean(c, 0.2)[0] == 1.0);
    CHECK_THROWS((void)chain_mean(c, 1.0));
}

TEST_CASE("implicit sampling and Metropolis agree on a shared posterior")
{
    const Objective F = [](const Vector& x) {
        const double r = 1.0 - (x[0] + 0.3 * x[0] * x[0] * x[0] + 0.5 * x[1]);
        return 0.5 * x.squaredNorm() + r * r / (2 * 0.25);
    };
    const auto mode = find_mode(F, Vector::Zero(2));
    const Vector is = conditional_mean(implicit_sample(F, mode, 4000, 1));
    const Vector mh = chain_mean(rw_metropolis(F, mode.mode, 100'000, 0.5, 2), 0.2);
    CHECK((is - mh).cwiseAbs().maxCoeff() < 0.2);
}

}  // TEST_SUITE
