#pragma once

// Named experiments over the elliptic inverse problem: PCE accuracy table,
// field snapshots, sampling-error sweep, reconstructed fields, cost
// accounting, and the small-noise divergence curves.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chaos/bayes.hpp"
#include "chaos/forward.hpp"
#include "chaos/pce.hpp"
#include "chaos/samplers.hpp"

namespace chaos::experiments {

inline constexpr const char* kVersion = "1.0.0";

struct ExperimentConfig {
    std::string experiment;
    int m = 3;
    std::vector<int> orders{4, 8};
    double noise_sd = 0.05;
    std::optional<std::pair<int, int>> theta1_range;  // overrides the per-experiment default
    double theta2 = -1.0;
    double theta3 = 1.0;
    int particles = 20;
    std::uint64_t seed = 2014;
    std::string out_dir = "out";
    std::string pce_dir;  // load pce_N<order>.csv from here when present
    int order = 8;  // build-pce order

    double fields_theta1 = -15.0;
    int mcmc_steps = 50'000;
    double mcmc_step_sd = 0.3;
    double burn_in = 0.2;

    std::string toy = "cubic";
    std::optional<double> toy_data;
    double toy_noise_sd = 1.0;
    double toy_c = 0.2;
    int toy_order = 1;
    std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};

    [[nodiscard]] std::pair<int, int> theta1_range_or(std::pair<int, int> fallback) const
    {
        return theta1_range.value_or(fallback);
    }
    /// Stable key=value rendering of every field, used for the config hash.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::uint64_t hash() const;
    /// Metadata lines written at the top of every output file.
    [[nodiscard]] std::vector<std::string> header(const std::string& what) const;
};

/// Apply one key=value setting; throws std::invalid_argument on unknown keys.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Plain-text key=value file, '#' comments.
[[nodiscard]] ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
[[nodiscard]] std::pair<int, int> parse_range(const std::string& text);

/// PDE solves attributed to named phases, reconciled against the global counter.
class RunReport {
public:
    explicit RunReport(std::string name);

    void add(const std::string& phase, std::uint64_t solves) { phases_[phase] += solves; }
    [[nodiscard]] const std::map<std::string, std::uint64_t>& phases() const { return phases_; }
    [[nodiscard]] std::uint64_t attributed() const;
    [[nodiscard]] std::uint64_t counted() const;  // global counter delta since construction
    [[nodiscard]] bool reconciled() const { return attributed() == counted(); }
    [[nodiscard]] double seconds() const;
    [[nodiscard]] std::string summary() const;

private:
    std::string name_;
    std::map<std::string, std::uint64_t> phases_;
    std::uint64_t start_count_;
    std::chrono::steady_clock::time_point start_time_;
};

/// Shared state for a run: forward model, observation layout, PCE cache.
class Workbench {
public:
    explicit Workbench(const ExperimentConfig& cfg);

    [[nodiscard]] const ExperimentConfig& config() const { return cfg_; }
    [[nodiscard]] const EllipticForward& forward() const { return forward_; }
    [[nodiscard]] const fem::ObservationOperator& observation() const { return obs_; }
    [[nodiscard]] Vector theta(double theta1) const;

    /// Built on first use (or loaded from pce_dir); solves are charged to the report.
    const pce::PceModel& pce(int order, RunReport& report);

private:
    ExperimentConfig cfg_;
    EllipticForward forward_;
    fem::ObservationOperator obs_;
    std::map<int, std::unique_ptr<pce::PceModel>> cache_;
};

inline constexpr fem::Point kTablePoint{0.5, 0.5625};

struct Table1 {
    std::vector<int> theta1;
    std::vector<int> orders;
    std::vector<std::vector<double>> rel_error;  // [order][theta1], percent
    std::vector<double> fem_value;  // u_fem at the table point
    std::vector<bool> weak_signal;  // |u_fem| at the table point below 2 sigma
};

[[nodiscard]] Table1 run_table1(Workbench& wb, RunReport& report);

struct FieldDiscrepancy {
    std::vector<double> theta;
    int order = 0;
    double max_abs = 0.0;
    double fem_max = 0.0;
    [[nodiscard]] double relative() const { return max_abs / fem_max; }
};

[[nodiscard]] std::vector<FieldDiscrepancy> run_figure1(Workbench& wb, RunReport& report);

struct SweepPoint {
    int theta1 = 0;
    std::string sampler;  // "exact", "pce4", "pce8", ...
    double error = 0.0;
    std::uint64_t evals = 0;
    double ess = 0.0;
    bool degenerate = false;
    Vector estimate;
};

struct Figure2 {
    std::vector<int> theta1;
    std::vector<std::string> samplers;
    std::vector<std::vector<SweepPoint>> points;  // [theta1][sampler]

    [[nodiscard]] double error(std::size_t t, const std::string& sampler) const;
};

[[nodiscard]] Figure2 run_figure2(Workbench& wb, RunReport& report);

struct Fields {
    Vector theta_true;
    Vector exact_estimate;
    Vector surrogate_estimate;
    double exact_rms = 0.0;  // grid RMS of the log-permeability error
    double surrogate_rms = 0.0;
    double acceptance_rate = 0.0;
};

[[nodiscard]] Fields run_fields(Workbench& wb, RunReport& report, std::optional<Vector> theta_true = std::nullopt);

struct CostReport {
    std::map<int, std::uint64_t> pce_build;  // order -> solves
    std::vector<int> theta1;
    std::vector<std::uint64_t> posterior_evals;  // exact implicit sampling per datum
    std::vector<std::uint64_t> pde_solves;  // same runs, from the solve counter
    bool reconciled = false;
};

[[nodiscard]] CostReport run_cost_report(Workbench& wb, RunReport& report);

struct SmallNoise {
    std::vector<bayes::ClaimRow> claim1_linear;
    std::vector<bayes::ClaimRow> claim1_toy;
    std::vector<bayes::ClaimRow> claim2_toy;
    std::vector<bayes::NormalizerCheck> normalizer;
};

/// Toy data default: for the cubic toy, d = h(2) + sigma^2 2 / h'(2) puts the
/// minimizer of F at theta = 2.
[[nodiscard]] bayes::ToyModel toy_from_config(const ExperimentConfig& cfg);
[[nodiscard]] SmallNoise run_smallnoise(const ExperimentConfig& cfg);

/// Build one PCE of cfg.order and write pce_N<order>.csv plus its sidecar.
[[nodiscard]] std::string run_build_pce(Workbench& wb, RunReport& report);

}  // namespace chaos::experiments
