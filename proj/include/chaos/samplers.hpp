#pragma once

// Mode finding, implicit sampling (Gaussian map at the mode with exact
// reweighting), random-walk Metropolis, and the conditional-mean estimator.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaos/common.hpp"

namespace chaos::samplers {

/// Negative log density F (up to a constant).
using Objective = std::function<double(const Vector&)>;

struct ModeOptions {
    double grad_tol = 1e-6;
    double fd_step = 1e-5;  // forward-difference gradient step
    double hessian_step = 1e-3;  // central second-difference step
    int max_iterations = 200;
    double max_step = 2.0;  // cap on the length of one quasi-Newton step
    double eig_floor = 1e-8;
};

struct ModeResult {
    Vector mode;
    Matrix hessian;
    double value = 0.0;
    std::uint64_t eval_count = 0;
    int iterations = 0;
    double grad_norm = 0.0;
    bool hessian_floored = false;
    bool stalled = false;  // stopped on step size, not gradient norm
};

class OptimizationError : public std::runtime_error {
public:
    OptimizationError(const std::string& what, std::uint64_t evals) : std::runtime_error(what), eval_count(evals) {}
    std::uint64_t eval_count;
};

/// Forward differences; f0 = F(theta). Costs dim evaluations.
[[nodiscard]] Vector forward_gradient(const Objective& F, const Vector& theta, double f0, double step);
/// Central differences. Costs 2 dim evaluations.
[[nodiscard]] Vector central_gradient(const Objective& F, const Vector& theta, double step);
/// Central second differences, symmetrized; f0 = F(theta).
[[nodiscard]] Matrix fd_hessian(const Objective& F, const Vector& theta, double f0, double step);

/// BFGS with finite-difference gradients and backtracking line search.
/// Forward differences drive the early iterations; once progress stalls the
/// gradient switches to central differences. The Hessian at the end comes
/// from central second differences, is floored to be SPD, and one Newton
/// correction from the same stencil is taken if it lowers F. Non-finite or
/// throwing evaluations are treated as +infinity by the line search.
[[nodiscard]] ModeResult find_mode(const Objective& F, const Vector& start, const ModeOptions& opts = {});

struct WeightedEnsemble {
    std::vector<Vector> samples;
    std::vector<double> weights;  // normalized
    std::uint64_t eval_count = 0;  // mode finding plus one per sample
    double ess = 0.0;
    bool degenerate = false;  // ess < 0.1 n
};

/// theta_k = mu + L xi_k with L L^T = H^{-1}, xi_k ~ N(0, I), and
/// log w_k = -F(theta_k) + F(mu) + |xi_k|^2 / 2. xi_k comes from a stream
/// seeded by (seed, k), so serial and parallel runs agree exactly.
[[nodiscard]] WeightedEnsemble implicit_sample(const Objective& F, const ModeResult& mode, int n, std::uint64_t seed,
                                               Execution execution = Execution::Parallel);

struct Chain {
    std::vector<Vector> states;  // one per step, start excluded
    double acceptance_rate = 0.0;
    std::uint64_t eval_count = 0;
};

/// Metropolis acceptance probability for moving from F = f_current to f_proposed.
[[nodiscard]] double metropolis_acceptance(double f_current, double f_proposed);

[[nodiscard]] Chain rw_metropolis(const Objective& F, const Vector& start, int n_steps, double step_sd,
                                  std::uint64_t seed);

/// Mean of the chain after discarding the leading burn_fraction of states.
[[nodiscard]] Vector chain_mean(const Chain& chain, double burn_fraction = 0.2);

[[nodiscard]] Vector conditional_mean(const WeightedEnsemble& ensemble);

[[nodiscard]] double estimation_error(const Vector& estimate, const Vector& truth);

}  // namespace chaos::samplers
