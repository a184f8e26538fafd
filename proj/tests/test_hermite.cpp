#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <set>

#include "chaos/hermite.hpp"
#include "oracles.hpp"

using namespace chaos;
using boost::multiprecision::cpp_rational;

namespace {

// He_k(x) in exact rationals, He_{k+1} = x He_k - k He_{k-1}.
cpp_rational exact_he(int k, const cpp_rational& x)
{
    cpp_rational a = 1, b = x;
    if (k == 0) return a;
    for (int j = 1; j < k; ++j) {
        cpp_rational c = x * b - cpp_rational(j) * a;
        a = b;
        b = c;
    }
    return b;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST_SUITE("hermite") {

TEST_CASE("low order values")
{
    CHECK(hermite_eval(0, 0.7) == 1.0);
    CHECK(hermite_eval(1, 0.7) == doctest::Approx(0.7));
    CHECK(hermite_eval(2, 1.0) == doctest::Approx(0.0));
    CHECK(hermite_eval(2, 2.0) == doctest::Approx(3.0 / std::sqrt(2.0)));
    CHECK(hermite_eval(3, 1.0) == doctest::Approx(-2.0 / std::sqrt(6.0)));
}

TEST_CASE("agrees with exact rational recurrence")
{
    for (int k = 0; k <= 20; ++k)
        for (int num = -32; num <= 32; num += 3) {
            const cpp_rational x(num, 4);
            const double ref = static_cast<double>(exact_he(k, x)) / std::sqrt(factorial(k));
            const double got = hermite_eval(k, static_cast<double>(x));
            CHECK(got == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("eval_all matches single evaluations")
{
    std::vector<double> all;
    hermite_eval_all(12, -1.3, all);
    REQUIRE(all.size() == 13);
    for (int k = 0; k <= 12; ++k) CHECK(all[std::size_t(k)] == hermite_eval(k, -1.3));
}

TEST_CASE("negative degree rejected")
{
    CHECK_THROWS_AS((void)hermite_eval(-1, 0.0), std::invalid_argument);
}

TEST_CASE("rule weights and symmetry")
{
    for (int q : {1, 2, 5, 10, 21}) {
        const auto r = gauss_hermite_rule(q);
        REQUIRE(r.size() == std::size_t(q));
        double s = 0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            s += r.weights[k];
            CHECK(r.weights[k] > 0);
            CHECK(r.nodes[k] == doctest::Approx(-r.nodes[r.size() - 1 - k]).epsilon(1e-12).scale(1.0));
            if (k) CHECK(r.nodes[k] > r.nodes[k - 1]);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS((void)gauss_hermite_rule(0));
}

TEST_CASE("q point rule integrates moments to degree 2q-1")
{
    const auto r = gauss_hermite_rule(10);
    for (int p = 0; p <= 19; ++p) {
        double s = 0, scale = 0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            s += r.weights[k] * std::pow(r.nodes[k], p);
            scale += r.weights[k] * std::pow(std::abs(r.nodes[k]), p);
        }
        CHECK(std::abs(s - oracle::gaussian_moment(p)) <= 1e-12 * scale);
    }
}

TEST_CASE("basis size and enumeration")
{
    CHECK(basis_size(3, 4) == 35);
    CHECK(basis_size(3, 8) == 165);
    CHECK(basis_size(1, 6) == 7);
    CHECK_THROWS_AS((void)basis_size(0, 5), std::invalid_argument);
    CHECK_THROWS_AS((void)basis_size(200, 200), std::overflow_error);

    const auto idx = multi_indices(3, 4);
    REQUIRE(idx.size() == 35);
    CHECK(idx[0] == MultiIndex({0, 0, 0}));
    CHECK(idx[1] == MultiIndex({1, 0, 0}));
    CHECK(idx[2] == MultiIndex({0, 1, 0}));
    CHECK(idx[3] == MultiIndex({0, 0, 1}));
    CHECK(idx[4] == MultiIndex({2, 0, 0}));
    std::set<std::vector<int>> seen;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        seen.insert(idx[k].entries());
        if (k) CHECK(idx[k].degree() >= idx[k - 1].degree());
    }
    CHECK(seen.size() == idx.size());
}

TEST_CASE("phi_eval dimension mismatch throws")
{
    CHECK_THROWS_AS((void)phi_eval(MultiIndex({1, 2}), Vector::Zero(3)), std::invalid_argument);
    Vector t(2);
    t << 0.5, -1.5;
    CHECK(phi_eval(MultiIndex({1, 2}), t) == doctest::Approx(hermite_eval(1, 0.5) * hermite_eval(2, -1.5)));
}

TEST_CASE("tensor rule order and budget")
{
    const auto t = tensor_rule(2, 3);
    REQUIRE(t.size() == 9);
    const auto r = gauss_hermite_rule(3);
    CHECK(t.nodes(1, 0) == r.nodes[0]);
    CHECK(t.nodes(1, 1) == r.nodes[1]);
    CHECK(t.nodes(3, 0) == r.nodes[1]);
    CHECK_THROWS_AS((void)tensor_rule(6, 12, 1000), std::length_error);
}

TEST_CASE("gram matrix is identity under the tensor rule")
{
    const int m = 3, N = 8;
    const auto idx = multi_indices(m, N);
    const auto rule = tensor_rule(m, N + 2);
    Matrix phi(rule.size(), idx.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const Vector x = rule.nodes.row(Eigen::Index(k)).transpose();
        for (std::size_t i = 0; i < idx.size(); ++i) phi(Eigen::Index(k), Eigen::Index(i)) = phi_eval(idx[i], x);
    }
    Vector w(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) w[Eigen::Index(k)] = rule.weights[k];
    const Matrix gram = phi.transpose() * w.asDiagonal() * phi;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

}  // TEST_SUITE
