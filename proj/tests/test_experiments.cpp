#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chaos/experiments.hpp"
#include "chaos/io.hpp"

using namespace chaos;
namespace ex = chaos::experiments;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("chaos_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("config file parsing")
{
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "a.cfg");
        f << "# comment\n  seed = 77\norders=4, 8\ntheta1_range=-3:1  # inline\n\nnoise_sd=0.1\ntoy=linear\n";
    }
    const auto cfg = ex::load_config((dir / "a.cfg").string());
    CHECK(cfg.seed == 77);
    CHECK(cfg.orders == std::vector<int>{4, 8});
    CHECK(cfg.theta1_range_or({0, 0}) == std::pair{-3, 1});
    CHECK(cfg.noise_sd == 0.1);
    CHECK(cfg.toy == "linear");
    {
        std::ofstream f(dir / "b.cfg");
        f << "bogus=1\n";
    }
    CHECK_THROWS_AS((void)ex::load_config((dir / "b.cfg").string()), std::invalid_argument);
    CHECK_THROWS((void)ex::load_config((dir / "missing.cfg").string()));
    CHECK_THROWS_AS((void)ex::parse_range("5"), std::invalid_argument);
    CHECK_THROWS_AS((void)ex::parse_range("2:1"), std::invalid_argument);
    ex::ExperimentConfig c;
    CHECK_THROWS_AS(ex::apply_setting(c, "toy", "quartic"), std::invalid_argument);
}

TEST_CASE("config hash tracks every setting")
{
    ex::ExperimentConfig a, b;
    CHECK(a.hash() == b.hash());
    b.particles = 21;
    CHECK(a.hash() != b.hash());
    const auto h = a.header("table1");
    CHECK(h[0].rfind("chaos-gate", 0) == 0);
    CHECK(std::find(h.begin(), h.end(), "seed=2014") != h.end());
}

TEST_CASE("theta layout")
{
    ex::ExperimentConfig cfg;
    ex::Workbench wb(cfg);
    const Vector t = wb.theta(-4);
    CHECK(t.size() == 3);
    CHECK(t[0] == -4);
    CHECK(t[1] == -1);
    CHECK(t[2] == 1);
}

TEST_CASE("table1 output is deterministic and reconciled")
{
    ex::ExperimentConfig cfg;
    cfg.theta1_range = {-3, -2};
    std::string first;
    for (int run = 0; run < 2; ++run) {
        cfg.out_dir = scratch("t1_" + std::to_string(run)).string();
        ex::Workbench wb(cfg);
        ex::RunReport report("table1");
        const auto t = ex::run_table1(wb, report);
        CHECK(report.reconciled());
        CHECK(report.phases().at("pce_build_N4") == 216);
        CHECK(report.phases().at("pce_build_N8") == 1000);
        REQUIRE(t.theta1 == std::vector<int>{-3, -2});
        CHECK(t.rel_error[0][0] < 10);
        const auto text = slurp(fs::path(cfg.out_dir) / "table1.csv");
        if (run == 0) first = text;
        else CHECK(text == first);
    }
    const auto table = io::read_csv((fs::path(cfg.out_dir) / "table1.csv").string());
    CHECK(table.header.front() == "theta1");
    CHECK(table.rows.size() == 2);
}

TEST_CASE("stored surrogates are reused")
{
    ex::ExperimentConfig cfg;
    cfg.out_dir = scratch("pce_store").string();
    cfg.order = 4;
    {
        ex::Workbench wb(cfg);
        ex::RunReport report("build-pce");
        (void)ex::run_build_pce(wb, report);
    }
    cfg.pce_dir = cfg.out_dir;
    ex::Workbench wb(cfg);
    ex::RunReport report("reuse");
    (void)wb.pce(4, report);
    CHECK(report.attributed() == 0);
    CHECK(report.counted() == 0);
}

TEST_CASE("figure2 sweep is deterministic")
{
    ex::ExperimentConfig cfg;
    cfg.theta1_range = {-2, -1};
    cfg.orders = {4};
    std::string first;
    for (int run = 0; run < 2; ++run) {
        cfg.out_dir = scratch("f2_" + std::to_string(run)).string();
        ex::Workbench wb(cfg);
        ex::RunReport report("figure2");
        const auto fig = ex::run_figure2(wb, report);
        CHECK(report.reconciled());
        CHECK(fig.samplers == std::vector<std::string>{"exact", "pce4"});
        CHECK(fig.error(0, "exact") < 1.5);
        CHECK_THROWS_AS((void)fig.error(0, "pce8"), std::out_of_range);
        const auto text = slurp(fs::path(cfg.out_dir) / "figure2.csv");
        if (run == 0) first = text;
        else CHECK(text == first);
    }
    CHECK(fs::exists(fs::path(cfg.out_dir) / "figure2.svg"));
}

TEST_CASE("fields at the origin and grid shape")
{
    ex::ExperimentConfig cfg;
    cfg.out_dir = scratch("fields").string();
    cfg.mcmc_steps = 2000;
    ex::Workbench wb(cfg);
    ex::RunReport report("fields");
    const auto f = ex::run_fields(wb, report, Vector::Zero(3));
    CHECK(report.reconciled());
    const auto truth = io::read_csv((fs::path(cfg.out_dir) / "fields_truth.csv").string());
    CHECK(truth.rows.size() == 17);
    CHECK(truth.header.size() == 18);
    for (const auto& row : truth.rows)
        for (std::size_t k = 1; k < row.size(); ++k) CHECK(std::stod(row[k]) == 0.0);
    CHECK(f.exact_rms < 0.5);
}

TEST_CASE("cubic toy default puts the minimizer at two")
{
    ex::ExperimentConfig cfg;
    const auto toy = ex::toy_from_config(cfg);
    CHECK(toy.data == doctest::Approx(3.6 + 2.0 / 3.4));
    const auto r = bayes::minimize_scalar([&](double t) { return toy.F(t); }, -10, 10);
    CHECK(r.argmin == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("smallnoise writes the curves")
{
    ex::ExperimentConfig cfg;
    cfg.out_dir = scratch("sn").string();
    cfg.eps_list = {1e-2, 1e-3};
    const auto s = ex::run_smallnoise(cfg);
    CHECK(s.claim1_linear.size() == 2);
    const auto t = io::read_csv((fs::path(cfg.out_dir) / "smallnoise.csv").string());
    CHECK(t.rows.size() == 8);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "smallnoise.svg"));
}

}  // TEST_SUITE
