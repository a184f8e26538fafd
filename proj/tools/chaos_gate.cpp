// chaos-gate: command-line driver for the experiments.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaos/experiments.hpp"

namespace ex = chaos::experiments;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> order;
    std::optional<std::string> range;
    std::optional<int> m;
    std::optional<std::string> pce_dir;
    std::vector<std::string> settings;
    // smallnoise
    std::optional<std::string> toy;
    std::optional<double> toy_data;
    std::optional<double> toy_sd;
    std::optional<double> toy_c;
    std::optional<int> toy_order;
    std::optional<std::string> eps;
};

ex::ExperimentConfig resolve(const Flags& f, const std::string& name)
{
    ex::ExperimentConfig cfg = f.config.empty() ? ex::ExperimentConfig{} : ex::load_config(f.config);
    cfg.experiment = name;
    for (const auto& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        ex::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.order) {
        cfg.order = *f.order;
        cfg.toy_order = *f.order;
    }
    if (f.range) cfg.theta1_range = ex::parse_range(*f.range);
    if (f.m) cfg.m = *f.m;
    if (f.pce_dir) cfg.pce_dir = *f.pce_dir;
    if (f.toy) ex::apply_setting(cfg, "toy", *f.toy);
    if (f.toy_data) cfg.toy_data = *f.toy_data;
    if (f.toy_sd) cfg.toy_noise_sd = *f.toy_sd;
    if (f.toy_c) cfg.toy_c = *f.toy_c;
    if (f.toy_order) cfg.toy_order = *f.toy_order;
    if (f.eps) ex::apply_setting(cfg, "eps_list", *f.eps);
    return cfg;
}

void print_error(const std::string& kind, const std::string& message)
{
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

int run(const std::string& name, const Flags& flags)
{
    const ex::ExperimentConfig cfg = resolve(flags, name);
    ex::RunReport report(name);

    if (name == "smallnoise") {
        const auto s = ex::run_smallnoise(cfg);
        for (const auto& r : s.claim2_toy)
            std::cout << "eps=" << r.eps << " eps*KL=" << r.scaled_kld << " limit=" << r.limit << '\n';
        std::cout << "wrote " << cfg.out_dir << "/smallnoise.csv\n";
        return 0;
    }

    ex::Workbench wb(cfg);
    if (name == "build-pce") {
        std::cout << "wrote " << ex::run_build_pce(wb, report) << '\n';
    } else if (name == "table1") {
        const auto t = ex::run_table1(wb, report);
        for (std::size_t k = 0; k < t.theta1.size(); ++k) {
            std::cout << "theta1=" << t.theta1[k];
            for (std::size_t o = 0; o < t.orders.size(); ++o)
                std::cout << " N" << t.orders[o] << "=" << t.rel_error[o][k] << "%";
            std::cout << (t.weak_signal[k] ? " (weak signal)" : "") << '\n';
        }
    } else if (name == "figure1") {
        for (const auto& d : ex::run_figure1(wb, report))
            std::cout << "theta1=" << d.theta[0] << " N=" << d.order << " max|u_N-u|=" << d.max_abs
                      << " relative=" << d.relative() << '\n';
    } else if (name == "figure2") {
        const auto fig = ex::run_figure2(wb, report);
        for (std::size_t t = 0; t < fig.theta1.size(); ++t) {
            std::cout << "theta1=" << fig.theta1[t];
            for (const auto& p : fig.points[t]) std::cout << ' ' << p.sampler << '=' << p.error;
            std::cout << '\n';
        }
    } else if (name == "fields") {
        const auto f = ex::run_fields(wb, report);
        std::cout << "exact rms=" << f.exact_rms << " surrogate rms=" << f.surrogate_rms
                  << " acceptance=" << f.acceptance_rate << '\n';
    } else if (name == "cost") {
        const auto c = ex::run_cost_report(wb, report);
        for (const auto& [N, n] : c.pce_build) std::cout << "pce_build_N" << N << "=" << n << '\n';
        for (std::size_t k = 0; k < c.theta1.size(); ++k)
            std::cout << "theta1=" << c.theta1[k] << " evals=" << c.posterior_evals[k] << '\n';
        if (!c.reconciled) throw std::runtime_error("solve counter does not reconcile with attributed solves");
    }
    std::cout << report.summary();
    if (!report.reconciled()) {
        print_error("accounting", "attributed PDE solves do not match the solve counter");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"PCE surrogates and implicit sampling for an elliptic inverse problem", "chaos-gate"};
    app.set_version_flag("--version", ex::kVersion);
    app.require_subcommand(1);

    Flags flags;
    app.add_option("--config", flags.config, "key=value settings file");
    app.add_option("--seed", flags.seed, "master seed (u64)");
    app.add_option("--out", flags.out, "output directory");
    app.add_option("--order", flags.order, "PCE order for build-pce, surrogate order for smallnoise");
    app.add_option("--theta1-range", flags.range, "integer sweep range a:b");
    app.add_option("--m", flags.m, "number of KL modes");
    app.add_option("--pce-dir", flags.pce_dir, "reuse pce_N<order>.csv files from this directory");
    app.add_option("--set", flags.settings, "extra key=value setting (repeatable)");
    app.add_option("--toy", flags.toy, "smallnoise toy: linear or cubic");
    app.add_option("--toy-data", flags.toy_data, "smallnoise datum d");
    app.add_option("--toy-sigma", flags.toy_sd, "smallnoise noise sd");
    app.add_option("--toy-c", flags.toy_c, "cubic coefficient");
    app.add_option("--eps", flags.eps, "comma-separated eps list");
    // Options are global; subcommands only select the experiment.
    app.fallthrough();

    const char* names[][2] = {{"build-pce", "build and save one chaos surrogate"},
                              {"table1", "relative error of u_N at the table point"},
                              {"figure1", "surrogate vs FEM solution fields"},
                              {"figure2", "conditional-mean error sweep over theta_1"},
                              {"fields", "reconstructed log-permeability fields"},
                              {"smallnoise", "scaled divergence curves for the toy models"},
                              {"cost", "PDE solve accounting"}};
    for (const auto& [name, help] : names) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run(name, flags);
    } catch (const chaos::samplers::OptimizationError& e) {
        print_error("optimization", e.what());
    } catch (const chaos::bayes::CoverageError& e) {
        print_error("coverage", e.what());
    } catch (const chaos::fem::SolveError& e) {
        print_error("solver", e.what());
    } catch (const chaos::pce::ForwardFailure& e) {
        print_error("forward", e.what());
    } catch (const std::invalid_argument& e) {
        print_error("config", e.what());
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
    }
    return 1;
}
