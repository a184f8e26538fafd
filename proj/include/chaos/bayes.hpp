#pragma once

// Posterior and surrogate posterior for d = G u(theta) + eta with a standard
// Gaussian prior, synthetic data, and grid quadrature for Kullback-Leibler
// divergences between small-noise densities.

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chaos/fem.hpp"
#include "chaos/forward.hpp"
#include "chaos/pce.hpp"

namespace chaos::bayes {

using Objective = std::function<double(const Vector&)>;

enum class ForwardKind { FemExact, Pce };

struct PosteriorSpec {
    Vector data;
    double noise_sd = 0.05;
    ForwardKind kind = ForwardKind::FemExact;
    int pce_order = -1;  // meaningful for ForwardKind::Pce
    int dim = 0;
    ForwardMap observed;  // theta -> G forward(theta)
    std::optional<double> small_noise_eps;

    /// F(theta) = |theta|^2 / 2 + |d - G u(theta)|^2 / (2 sigma^2).
    [[nodiscard]] double neg_log_posterior(const Vector& theta) const;
    /// -F/eps with small_noise_eps set, -F otherwise (unnormalized).
    [[nodiscard]] double log_density(const Vector& theta) const;
    [[nodiscard]] Objective objective() const;
};

[[nodiscard]] inline double neg_log_posterior(const PosteriorSpec& spec, const Vector& theta)
{
    return spec.neg_log_posterior(theta);
}

/// F with the FEM forward; every evaluation is one PDE solve. `forward`
/// must outlive the returned spec.
[[nodiscard]] PosteriorSpec exact_posterior(const EllipticForward& forward, const fem::ObservationOperator& obs,
                                            Vector data, double noise_sd);

/// F_N with the chaos surrogate restricted to the observed outputs.
[[nodiscard]] PosteriorSpec surrogate_posterior(const pce::PceModel& model, const fem::ObservationOperator& obs,
                                                Vector data, double noise_sd);

/// d = G u(theta_true) + eta, eta ~ N(0, sigma^2 I).
[[nodiscard]] Vector synthesize_data(const EllipticForward& forward, const fem::ObservationOperator& obs,
                                     const Vector& theta_true, double noise_sd, std::uint64_t seed);
[[nodiscard]] Vector synthesize_data(const Vector& clean_observations, double noise_sd, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Grid quadrature of densities known up to a constant.

using LogDensity = std::function<double(const Vector&)>;

struct Box {
    Vector lo;
    Vector hi;
};

class CoverageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
    int resolution = 4096;  // points per dimension, endpoints included
    double coverage_tol = 1e-8;  // bound on mass estimated outside the box
    std::size_t budget = 20'000'000;
};

/// ln of the integral of exp(log_p) over the box (tensor trapezoid).
[[nodiscard]] double log_normalizer(const LogDensity& log_p, const Box& box, const QuadratureOptions& opts = {});

/// KL(p_num || p_den) after normalizing both on the grid. Throws CoverageError
/// when either normalized density is not negligible on the box faces.
[[nodiscard]] double kld_quadrature(const LogDensity& log_p_num, const LogDensity& log_p_den, const Box& box,
                                    const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Scalar toy models for the small-noise claims.

struct ToyModel {
    enum class Kind { Linear, Cubic };
    Kind kind = Kind::Linear;
    double c = 0.2;  // cubic coefficient: h(theta) = theta + c theta^3
    double data = 1.0;
    double noise_sd = 1.0;

    [[nodiscard]] static ToyModel linear(double data = 1.0, double noise_sd = 1.0);
    [[nodiscard]] static ToyModel cubic(double c, double data, double noise_sd = 1.0);

    [[nodiscard]] double h(double theta) const;
    [[nodiscard]] double F(double theta) const;
};

/// Degree-N Hermite projection of a toy forward map.
struct ToySurrogate {
    std::vector<double> coefficients;  // a_0, ..., a_N

    [[nodiscard]] double operator()(double theta) const;
};

[[nodiscard]] ToySurrogate project_toy(const ToyModel& toy, int order);
[[nodiscard]] double surrogate_F(const ToyModel& toy, const ToySurrogate& hN, double theta);

class MultipleMinimizers : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScalarMin {
    double argmin = 0.0;
    double value = 0.0;
    int local_minima = 0;
};

/// Dense scan on [lo, hi] followed by golden-section polish of the best
/// bracket. Throws MultipleMinimizers if two separated local minima tie for
/// the global value (relative tolerance tie_tol).
[[nodiscard]] ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                        int scan_points = 100'000, double tie_tol = 1e-9);

struct ClaimRow {
    double eps = 0.0;
    double scaled_kld = 0.0;  // eps * KL
    double limit = 0.0;  // predicted eps -> 0 value
};

struct ClaimOptions {
    double search_lo = -10.0;
    double search_hi = 10.0;
    double box_sds = 12.0;
    QuadratureOptions quad{};
};

/// Rows (eps, eps KL(p_{0,eps} || p_eps), F(0) - min F).
[[nodiscard]] std::vector<ClaimRow> claim1_curve(const ToyModel& toy, const std::vector<double>& eps_list,
                                                 const ClaimOptions& opts = {});

/// Rows (eps, eps KL(p_{N,eps} || p_eps), F(theta_N*) - min F).
[[nodiscard]] std::vector<ClaimRow> claim2_curve(const ToyModel& toy, int order, const std::vector<double>& eps_list,
                                                 const ClaimOptions& opts = {});

struct NormalizerCheck {
    double eps = 0.0;
    double log_gamma = 0.0;
    double min_F = 0.0;
    double residual = 0.0;  // ln gamma + min F / eps - ln(2 pi eps) / 2
    double relative = 0.0;  // |residual| / (min F / eps)
};

[[nodiscard]] NormalizerCheck laplace_normalizer_check(const ToyModel& toy, double eps, const ClaimOptions& opts = {});

/// Variance of p_eps for a toy, by quadrature.
[[nodiscard]] double toy_posterior_variance(const ToyModel& toy, double eps, const ClaimOptions& opts = {});

}  // namespace chaos::bayes
