#include "chaos/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chaos/io.hpp"

namespace chaos::experiments {

namespace {

std::string join_ints(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
}

std::string join_doubles(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + io::format_double(v[k]);
    return s;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file)
{
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / file).string();
}

std::string theta_tag(double t1) { return "theta" + std::to_string(int(std::lround(t1))); }

}  // namespace

std::string ExperimentConfig::canonical() const
{
    std::ostringstream o;
    o << "m=" << m << ";orders=" << join_ints(orders) << ";noise_sd=" << io::format_double(noise_sd)
      << ";theta1_range=" << (theta1_range ? std::to_string(theta1_range->first) + ":" + std::to_string(theta1_range->second) : "default")
      << ";theta2=" << io::format_double(theta2) << ";theta3=" << io::format_double(theta3)
      << ";particles=" << particles << ";seed=" << seed << ";order=" << order
      << ";fields_theta1=" << io::format_double(fields_theta1) << ";mcmc_steps=" << mcmc_steps
      << ";mcmc_step_sd=" << io::format_double(mcmc_step_sd) << ";burn_in=" << io::format_double(burn_in)
      << ";toy=" << toy << ";toy_data=" << (toy_data ? io::format_double(*toy_data) : "default")
      << ";toy_noise_sd=" << io::format_double(toy_noise_sd) << ";toy_c=" << io::format_double(toy_c)
      << ";toy_order=" << toy_order << ";eps_list=" << join_doubles(eps_list);
    return o.str();
}

std::uint64_t ExperimentConfig::hash() const { return io::fnv1a64(canonical()); }

std::vector<std::string> ExperimentConfig::header(const std::string& what) const
{
    return {std::string("chaos-gate ") + kVersion,
            "experiment=" + what,
            "seed=" + std::to_string(seed),
            "config_hash=" + io::hex64(hash()),
            "modules=hermite/1 elliptic-fem/1 gauss-field/1 pce/1 bayes/1 samplers/1 experiments/1",
            "config=" + canonical()};
}

std::pair<int, int> parse_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("range must look like a:b, got '" + text + "'");
    const int a = std::stoi(text.substr(0, colon));
    const int b = std::stoi(text.substr(colon + 1));
    if (a > b) throw std::invalid_argument("range start exceeds end in '" + text + "'");
    return {a, b};
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    auto doubles = [](const std::string& v) {
        std::vector<double> out;
        for (const auto& p : io::split(v, ',')) out.push_back(std::stod(trim(p)));
        return out;
    };
    if (key == "m") cfg.m = std::stoi(value);
    else if (key == "orders") {
        cfg.orders.clear();
        for (const auto& p : io::split(value, ',')) cfg.orders.push_back(std::stoi(trim(p)));
    }
    else if (key == "noise_sd") cfg.noise_sd = std::stod(value);
    else if (key == "theta1_range") cfg.theta1_range = parse_range(value);
    else if (key == "theta2") cfg.theta2 = std::stod(value);
    else if (key == "theta3") cfg.theta3 = std::stod(value);
    else if (key == "particles") cfg.particles = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "out" || key == "out_dir") cfg.out_dir = value;
    else if (key == "pce_dir") cfg.pce_dir = value;
    else if (key == "order") cfg.order = std::stoi(value);
    else if (key == "fields_theta1") cfg.fields_theta1 = std::stod(value);
    else if (key == "mcmc_steps") cfg.mcmc_steps = std::stoi(value);
    else if (key == "mcmc_step_sd") cfg.mcmc_step_sd = std::stod(value);
    else if (key == "burn_in") cfg.burn_in = std::stod(value);
    else if (key == "toy") {
        if (value != "linear" && value != "cubic") throw std::invalid_argument("toy must be linear or cubic");
        cfg.toy = value;
    }
    else if (key == "toy_data") cfg.toy_data = std::stod(value);
    else if (key == "toy_noise_sd") cfg.toy_noise_sd = std::stod(value);
    else if (key == "toy_c") cfg.toy_c = std::stod(value);
    else if (key == "toy_order") cfg.toy_order = std::stoi(value);
    else if (key == "eps_list") cfg.eps_list = doubles(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

// ---------------------------------------------------------------------------

RunReport::RunReport(std::string name)
    : name_(std::move(name)), start_count_(fem::solve_count()), start_time_(std::chrono::steady_clock::now())
{
}

std::uint64_t RunReport::attributed() const
{
    std::uint64_t s = 0;
    for (const auto& [_, n] : phases_) s += n;
    return s;
}

std::uint64_t RunReport::counted() const { return fem::solve_count() - start_count_; }

double RunReport::seconds() const
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time_).count();
}

std::string RunReport::summary() const
{
    std::ostringstream o;
    o << "run " << name_ << "\n";
    for (const auto& [phase, n] : phases_) o << "  pde_solves[" << phase << "] = " << n << "\n";
    o << "  pde_solves[attributed] = " << attributed() << "\n";
    o << "  pde_solves[counter] = " << counted() << "\n";
    o << "  reconciled = " << (reconciled() ? "yes" : "NO") << "\n";
    o.precision(3);
    o << "  wall_clock_s = " << std::fixed << seconds() << "\n";
    return o.str();
}

// ---------------------------------------------------------------------------

Workbench::Workbench(const ExperimentConfig& cfg)
    : cfg_(cfg), forward_(make_default_forward(cfg.m)), obs_(fem::default_observation(forward_.mesh()))
{
}

Vector Workbench::theta(double theta1) const
{
    Vector t = Vector::Zero(cfg_.m);
    t[0] = theta1;
    if (cfg_.m > 1) t[1] = cfg_.theta2;
    if (cfg_.m > 2) t[2] = cfg_.theta3;
    return t;
}

const pce::PceModel& Workbench::pce(int order, RunReport& report)
{
    auto it = cache_.find(order);
    if (it != cache_.end()) return *it->second;

    std::unique_ptr<pce::PceModel> model;
    if (!cfg_.pce_dir.empty()) {
        const auto path = std::filesystem::path(cfg_.pce_dir) / ("pce_N" + std::to_string(order) + ".csv");
        if (std::filesystem::exists(path)) {
            model = std::make_unique<pce::PceModel>(pce::load_pce(path.string()));
            if (model->dim != cfg_.m || model->output_dim() != forward_.output_dim())
                throw std::runtime_error("stored PCE " + path.string() + " does not match the configured problem");
        }
    }
    if (!model) {
        model = std::make_unique<pce::PceModel>(pce::build_pce(forward_.as_map(), cfg_.m, order));
        report.add("pce_build_N" + std::to_string(order), model->provenance.forward_solves);
    }
    return *cache_.emplace(order, std::move(model)).first->second;
}

// ---------------------------------------------------------------------------

Table1 run_table1(Workbench& wb, RunReport& report)
{
    const auto& cfg = wb.config();
    const auto [lo, hi] = cfg.theta1_range_or({-8, 2});
    Table1 t;
    t.orders = cfg.orders;
    for (int th = lo; th <= hi; ++th) t.theta1.push_back(th);
    t.rel_error.assign(t.orders.size(), std::vector<double>(t.theta1.size()));

    const fem::Mesh& mesh = wb.forward().mesh();
    for (std::size_t k = 0; k < t.theta1.size(); ++k) {
        const Vector theta = wb.theta(t.theta1[k]);
        const Vector u = wb.forward()(theta);
        report.add("fem_reference", 1);
        t.fem_value.push_back(fem::eval_at_point(mesh, u, kTablePoint));
        t.weak_signal.push_back(std::abs(t.fem_value.back()) < 2.0 * cfg.noise_sd);
    }
    for (std::size_t o = 0; o < t.orders.size(); ++o) {
        const pce::PceModel& model = wb.pce(t.orders[o], report);
        for (std::size_t k = 0; k < t.theta1.size(); ++k) {
            t.rel_error[o][k] = pce::relative_error_at(model, wb.forward(), wb.theta(t.theta1[k]), kTablePoint);
            report.add("table1_fem", 1);
        }
    }

    std::vector<std::string> header{"theta1", "u_fem", "weak_signal"};
    for (int N : t.orders) header.push_back("relerr_pct_N" + std::to_string(N));
    auto meta = cfg.header("table1");
    meta.push_back("point=(0.5,0.5625)");
    io::CsvWriter csv(out_path(cfg, "table1.csv"), meta, header);
    for (std::size_t k = 0; k < t.theta1.size(); ++k) {
        csv.cell(t.theta1[k]).cell(t.fem_value[k]).cell(t.weak_signal[k] ? 1 : 0);
        for (std::size_t o = 0; o < t.orders.size(); ++o) csv.cell(t.rel_error[o][k]);
        csv.end_row();
    }
    return t;
}

std::vector<FieldDiscrepancy> run_figure1(Workbench& wb, RunReport& report)
{
    const auto& cfg = wb.config();
    const fem::Mesh& mesh = wb.forward().mesh();
    std::vector<FieldDiscrepancy> out;
    for (double t1 : {-2.0, -8.0}) {
        const Vector theta = wb.theta(t1);
        const Vector u = mesh.to_nodal(wb.forward()(theta));
        report.add("figure1_fem", 1);
        const std::string tag = theta_tag(t1);
        auto meta = cfg.header("figure1");
        meta.push_back("theta=(" + io::format_double(theta[0]) + "," + io::format_double(cfg.theta2) + "," +
                       io::format_double(cfg.theta3) + ")");
        fem::write_grid_csv(out_path(cfg, "figure1_" + tag + "_fem.csv"), mesh, u, meta);
        for (int N : cfg.orders) {
            const Vector un = mesh.to_nodal(pce::evaluate_pce(wb.pce(N, report), theta));
            auto m2 = meta;
            m2.push_back("order=" + std::to_string(N));
            fem::write_grid_csv(out_path(cfg, "figure1_" + tag + "_N" + std::to_string(N) + ".csv"), mesh, un, m2);
            FieldDiscrepancy d;
            d.theta.assign(theta.data(), theta.data() + theta.size());
            d.order = N;
            d.max_abs = (un - u).cwiseAbs().maxCoeff();
            d.fem_max = u.cwiseAbs().maxCoeff();
            out.push_back(d);
        }
    }
    io::CsvWriter csv(out_path(cfg, "figure1_summary.csv"), cfg.header("figure1"),
                      {"theta1", "order", "max_abs_discrepancy", "fem_max", "relative"});
    for (const auto& d : out) {
        csv.cell(d.theta[0]).cell(d.order).cell(d.max_abs).cell(d.fem_max).cell(d.relative());
        csv.end_row();
    }
    return out;
}

double Figure2::error(std::size_t t, const std::string& sampler) const
{
    for (const auto& p : points[t])
        if (p.sampler == sampler) return p.error;
    throw std::out_of_range("Figure2: no sampler " + sampler);
}

namespace {

struct PointOutcome {
    std::vector<SweepPoint> points;
    std::uint64_t exact_mode_evals = 0;
    std::uint64_t exact_sample_evals = 0;
};

SweepPoint sample_posterior(const bayes::PosteriorSpec& spec, const std::string& name, int theta1,
                            const Vector& truth, int particles, std::uint64_t seed, std::uint64_t& mode_evals,
                            std::uint64_t& sample_evals)
{
    SweepPoint p;
    p.theta1 = theta1;
    p.sampler = name;
    const auto F = spec.objective();
    try {
        const samplers::ModeResult mode = samplers::find_mode(F, Vector::Zero(spec.dim));
        mode_evals = mode.eval_count;
        const samplers::WeightedEnsemble ens = samplers::implicit_sample(F, mode, particles, seed, Execution::Serial);
        sample_evals = ens.eval_count - mode.eval_count;
        p.estimate = samplers::conditional_mean(ens);
        p.error = samplers::estimation_error(p.estimate, truth);
        p.evals = ens.eval_count;
        p.ess = ens.ess;
        p.degenerate = ens.degenerate;
    } catch (const samplers::OptimizationError& e) {
        mode_evals = e.eval_count;
        sample_evals = 0;
        p.estimate = Vector::Constant(spec.dim, std::nan(""));
        p.error = std::nan("");
        p.evals = e.eval_count;
        p.degenerate = true;
    }
    return p;
}

}  // namespace

Figure2 run_figure2(Workbench& wb, RunReport& report)
{
    const auto& cfg = wb.config();
    const auto [lo, hi] = cfg.theta1_range_or({-10, 2});
    Figure2 fig;
    for (int t = lo; t <= hi; ++t) fig.theta1.push_back(t);
    fig.samplers.push_back("exact");
    std::vector<const pce::PceModel*> models;
    for (int N : cfg.orders) {
        fig.samplers.push_back("pce" + std::to_string(N));
        models.push_back(&wb.pce(N, report));
    }

    const auto count = int(fig.theta1.size());
    std::vector<PointOutcome> outcomes(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < count; ++k) {
        try {
            const auto u = std::size_t(k);
            const Vector truth = wb.theta(fig.theta1[u]);
            const Vector d = bayes::synthesize_data(wb.forward(), wb.observation(), truth, cfg.noise_sd,
                                                    derive_seed(cfg.seed, u));
            const std::uint64_t sample_seed = derive_seed(cfg.seed, 10'000 + u);
            auto& out = outcomes[u];
            const auto exact = bayes::exact_posterior(wb.forward(), wb.observation(), d, cfg.noise_sd);
            out.points.push_back(sample_posterior(exact, "exact", fig.theta1[u], truth, cfg.particles, sample_seed,
                                                  out.exact_mode_evals, out.exact_sample_evals));
            for (std::size_t o = 0; o < models.size(); ++o) {
                const auto sur = bayes::surrogate_posterior(*models[o], wb.observation(), d, cfg.noise_sd);
                std::uint64_t a = 0, b = 0;
                out.points.push_back(
                    sample_posterior(sur, fig.samplers[o + 1], fig.theta1[u], truth, cfg.particles, sample_seed, a, b));
            }
        } catch (...) {
            errors[std::size_t(k)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& o : outcomes) {
        report.add("data_synthesis", 1);
        report.add("exact_mode_finding", o.exact_mode_evals);
        report.add("exact_sampling", o.exact_sample_evals);
        fig.points.push_back(std::move(o.points));
    }

    std::vector<std::string> header{"theta1", "sampler", "error", "evals", "ess", "degenerate"};
    for (int d = 0; d < cfg.m; ++d) header.push_back("estimate" + std::to_string(d + 1));
    auto meta = cfg.header("figure2");
    meta.push_back("particles=" + std::to_string(cfg.particles));
    io::CsvWriter csv(out_path(cfg, "figure2.csv"), meta, header);
    std::vector<io::Series> series(fig.samplers.size());
    for (std::size_t s = 0; s < fig.samplers.size(); ++s) {
        series[s].label = fig.samplers[s] == "exact" ? "posterior (no PCE)" : "PCE N=" + fig.samplers[s].substr(3);
        series[s].markers_only = true;
    }
    for (std::size_t t = 0; t < fig.points.size(); ++t)
        for (std::size_t s = 0; s < fig.points[t].size(); ++s) {
            const auto& p = fig.points[t][s];
            csv.cell(p.theta1).cell(p.sampler).cell(p.error).cell(static_cast<long long>(p.evals)).cell(p.ess)
                .cell(p.degenerate ? 1 : 0);
            for (Eigen::Index d = 0; d < p.estimate.size(); ++d) csv.cell(p.estimate[d]);
            csv.end_row();
            series[s].x.push_back(p.theta1);
            series[s].y.push_back(p.error);
        }
    io::write_line_plot(out_path(cfg, "figure2.svg"), series,
                        {"Estimation error of the conditional mean", "theta_1", "|mean - theta_true|", false, false});
    return fig;
}

Fields run_fields(Workbench& wb, RunReport& report, std::optional<Vector> theta_true)
{
    const auto& cfg = wb.config();
    Fields f;
    f.theta_true = theta_true.value_or(wb.theta(cfg.fields_theta1));
    const Vector d = bayes::synthesize_data(wb.forward(), wb.observation(), f.theta_true, cfg.noise_sd,
                                            derive_seed(cfg.seed, 777));
    report.add("data_synthesis", 1);

    const auto exact = bayes::exact_posterior(wb.forward(), wb.observation(), d, cfg.noise_sd);
    const auto F = exact.objective();
    try {
        const auto mode = samplers::find_mode(F, Vector::Zero(cfg.m));
        const auto ens = samplers::implicit_sample(F, mode, cfg.particles, derive_seed(cfg.seed, 778));
        report.add("exact_mode_finding", mode.eval_count);
        report.add("exact_sampling", ens.eval_count - mode.eval_count);
        f.exact_estimate = samplers::conditional_mean(ens);
    } catch (const samplers::OptimizationError& e) {
        report.add("exact_mode_finding", e.eval_count);
        throw;
    }

    const int N = *std::max_element(cfg.orders.begin(), cfg.orders.end());
    const auto sur = bayes::surrogate_posterior(wb.pce(N, report), wb.observation(), d, cfg.noise_sd);
    const auto chain = samplers::rw_metropolis(sur.objective(), Vector::Zero(cfg.m), cfg.mcmc_steps, cfg.mcmc_step_sd,
                                               derive_seed(cfg.seed, 779));
    f.surrogate_estimate = samplers::chain_mean(chain, cfg.burn_in);
    f.acceptance_rate = chain.acceptance_rate;

    const auto& basis = wb.forward().basis();
    const Vector y_true = field::field_from_params(basis, f.theta_true);
    const Vector y_exact = field::field_from_params(basis, f.exact_estimate);
    const Vector y_sur = field::field_from_params(basis, f.surrogate_estimate);
    const double n = double(y_true.size());
    f.exact_rms = std::sqrt((y_exact - y_true).squaredNorm() / n);
    f.surrogate_rms = std::sqrt((y_sur - y_true).squaredNorm() / n);

    const fem::Mesh& mesh = wb.forward().mesh();
    auto meta = cfg.header("fields");
    auto grid = [&](const Vector& y) {
        std::vector<std::vector<double>> g(std::size_t(mesh.nodes_per_side()));
        for (int b = 0; b < mesh.nodes_per_side(); ++b)
            for (int a = 0; a < mesh.nodes_per_side(); ++a) g[std::size_t(b)].push_back(y[mesh.node_id(a, b)]);
        return g;
    };
    const std::pair<const char*, const Vector*> outputs[] = {
        {"truth", &y_true}, {"exact", &y_exact}, {"surrogate_N" , &y_sur}};
    for (const auto& [name, y] : outputs) {
        std::string stem = std::string("fields_") + name;
        if (stem.back() == 'N') stem += std::to_string(N);
        fem::write_grid_csv(out_path(cfg, stem + ".csv"), mesh, *y, meta);
        io::write_heatmap(out_path(cfg, stem + ".svg"), grid(*y), "log-permeability: " + stem.substr(7));
    }
    io::CsvWriter csv(out_path(cfg, "fields_summary.csv"), meta,
                      {"estimator", "theta1", "theta2", "theta3", "grid_rms_error"});
    auto row = [&](const char* name, const Vector& t, double rms) {
        csv.cell(name);
        for (Eigen::Index k = 0; k < 3; ++k) csv.cell(k < t.size() ? t[k] : 0.0);
        csv.cell(rms);
        csv.end_row();
    };
    row("truth", f.theta_true, 0.0);
    row("exact_implicit", f.exact_estimate, f.exact_rms);
    row("surrogate_metropolis", f.surrogate_estimate, f.surrogate_rms);
    return f;
}

CostReport run_cost_report(Workbench& wb, RunReport& report)
{
    const auto& cfg = wb.config();
    CostReport c;
    for (int N : cfg.orders) {
        const auto before = fem::solve_count();
        const auto& model = wb.pce(N, report);
        const auto spent = fem::solve_count() - before;
        c.pce_build[N] = spent > 0 ? spent : model.provenance.forward_solves;
    }

    const auto [lo, hi] = cfg.theta1_range_or({-10, 2});
    bool reconciled = true;
    for (int t = lo; t <= hi; ++t) {
        const auto u = std::size_t(t - lo);
        const Vector truth = wb.theta(t);
        const Vector d = bayes::synthesize_data(wb.forward(), wb.observation(), truth, cfg.noise_sd,
                                                derive_seed(cfg.seed, u));
        report.add("data_synthesis", 1);
        const auto exact = bayes::exact_posterior(wb.forward(), wb.observation(), d, cfg.noise_sd);
        const auto before = fem::solve_count();
        std::uint64_t mode_evals = 0, sample_evals = 0;
        (void)sample_posterior(exact, "exact", t, truth, cfg.particles, derive_seed(cfg.seed, 10'000 + u), mode_evals,
                               sample_evals);
        const auto solves = fem::solve_count() - before;
        report.add("exact_mode_finding", mode_evals);
        report.add("exact_sampling", sample_evals);
        c.theta1.push_back(t);
        c.posterior_evals.push_back(mode_evals + sample_evals);
        c.pde_solves.push_back(solves);
        reconciled = reconciled && solves == mode_evals + sample_evals;
    }
    c.reconciled = reconciled && report.reconciled();

    auto meta = cfg.header("cost");
    io::CsvWriter csv(out_path(cfg, "cost.csv"), meta, {"item", "theta1", "posterior_evals", "pde_solves"});
    for (const auto& [N, n] : c.pce_build) {
        csv.cell("pce_build_N" + std::to_string(N)).cell("").cell("").cell(static_cast<long long>(n));
        csv.end_row();
    }
    for (std::size_t k = 0; k < c.theta1.size(); ++k) {
        csv.cell("implicit_sampling_exact").cell(c.theta1[k]).cell(static_cast<long long>(c.posterior_evals[k]))
            .cell(static_cast<long long>(c.pde_solves[k]));
        csv.end_row();
    }

    std::ofstream txt(out_path(cfg, "cost.txt"));
    for (const auto& m : meta) txt << "# " << m << '\n';
    for (const auto& [N, n] : c.pce_build) txt << "PCE build N=" << N << ": " << n << " PDE solves\n";
    if (!c.posterior_evals.empty()) {
        double mean = 0;
        for (auto e : c.posterior_evals) mean += double(e);
        mean /= double(c.posterior_evals.size());
        txt << "implicit sampling of the posterior: mean " << mean << " evaluations per datum (min "
            << *std::min_element(c.posterior_evals.begin(), c.posterior_evals.end()) << ", max "
            << *std::max_element(c.posterior_evals.begin(), c.posterior_evals.end()) << ")\n";
    }
    txt << "counter reconciled: " << (c.reconciled ? "yes" : "no") << '\n';
    return c;
}

bayes::ToyModel toy_from_config(const ExperimentConfig& cfg)
{
    if (cfg.toy == "linear") return bayes::ToyModel::linear(cfg.toy_data.value_or(1.0), cfg.toy_noise_sd);
    const double c = cfg.toy_c, s2 = cfg.toy_noise_sd * cfg.toy_noise_sd;
    const double h2 = 2.0 + c * 8.0, dh2 = 1.0 + 3.0 * c * 4.0;
    return bayes::ToyModel::cubic(c, cfg.toy_data.value_or(h2 + s2 * 2.0 / dh2), cfg.toy_noise_sd);
}

SmallNoise run_smallnoise(const ExperimentConfig& cfg)
{
    SmallNoise s;
    const auto linear = bayes::ToyModel::linear(1.0, 1.0);
    const auto toy = toy_from_config(cfg);
    s.claim1_linear = bayes::claim1_curve(linear, cfg.eps_list);
    s.claim1_toy = bayes::claim1_curve(toy, cfg.eps_list);
    s.claim2_toy = bayes::claim2_curve(toy, cfg.toy_order, cfg.eps_list);
    for (double eps : cfg.eps_list) s.normalizer.push_back(bayes::laplace_normalizer_check(toy, eps));

    auto meta = cfg.header("smallnoise");
    meta.push_back("toy=" + cfg.toy + " c=" + io::format_double(toy.c) + " d=" + io::format_double(toy.data) +
                   " sigma=" + io::format_double(toy.noise_sd) + " order=" + std::to_string(cfg.toy_order));
    io::CsvWriter csv(out_path(cfg, "smallnoise.csv"), meta, {"curve", "eps", "scaled_kld", "limit", "relative_gap"});
    auto emit = [&](const std::string& name, const std::vector<bayes::ClaimRow>& rows) {
        for (const auto& r : rows) {
            csv.cell(name).cell(r.eps).cell(r.scaled_kld).cell(r.limit)
                .cell(r.limit != 0 ? std::abs(r.scaled_kld - r.limit) / std::abs(r.limit) : std::abs(r.scaled_kld));
            csv.end_row();
        }
    };
    emit("claim1_linear", s.claim1_linear);
    emit("claim1_toy_" + cfg.toy, s.claim1_toy);
    emit("claim2_toy_" + cfg.toy, s.claim2_toy);
    for (const auto& n : s.normalizer) {
        csv.cell("laplace_normalizer_" + cfg.toy).cell(n.eps).cell(n.residual).cell(n.min_F / n.eps).cell(n.relative);
        csv.end_row();
    }

    std::vector<io::Series> series;
    auto add = [&](const std::string& label, const std::vector<bayes::ClaimRow>& rows) {
        io::Series kl{label, {}, {}, "", false}, lim{label + " limit", {}, {}, "", false};
        for (const auto& r : rows) {
            kl.x.push_back(r.eps);
            kl.y.push_back(r.scaled_kld);
            lim.x.push_back(r.eps);
            lim.y.push_back(r.limit);
        }
        series.push_back(kl);
        series.push_back(lim);
    };
    add("claim1 linear", s.claim1_linear);
    add("claim1 " + cfg.toy, s.claim1_toy);
    add("claim2 " + cfg.toy, s.claim2_toy);
    io::write_line_plot(out_path(cfg, "smallnoise.svg"), series,
                        {"eps * KL divergence vs eps", "eps", "eps * KL", true, true});
    return s;
}

std::string run_build_pce(Workbench& wb, RunReport& report)
{
    const auto& cfg = wb.config();
    const auto& model = wb.pce(cfg.order, report);
    const std::string path = out_path(cfg, "pce_N" + std::to_string(cfg.order) + ".csv");
    pce::save_pce(path, model, cfg.header("build-pce"));
    return path;
}

}  // namespace chaos::experiments
