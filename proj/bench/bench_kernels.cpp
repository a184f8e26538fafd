// Serial reference vs OpenMP kernels: chaos build over the tensor rule and
// implicit-sampling weights on the FEM posterior.

#include <benchmark/benchmark.h>

#include <cmath>

#include "chaos/bayes.hpp"
#include "chaos/pce.hpp"
#include "chaos/samplers.hpp"

using namespace chaos;

namespace {

const EllipticForward& forward()
{
    static const EllipticForward f = make_default_forward();
    return f;
}

void BM_PceBuild(benchmark::State& state, Execution exec)
{
    const int order = int(state.range(0));
    for (auto _ : state) {
        auto model = pce::build_pce(forward().as_map(), 3, order, {exec, kDefaultTensorBudget});
        benchmark::DoNotOptimize(model.coefficients.data());
    }
    state.counters["solves"] = std::pow(order + 2, 3);
}

void BM_ImplicitWeights(benchmark::State& state, Execution exec)
{
    const auto obs = fem::default_observation(forward().mesh());
    Vector truth(3);
    truth << -2, -1, 1;
    const Vector d = bayes::synthesize_data(forward(), obs, truth, 0.05, 1);
    const auto F = bayes::exact_posterior(forward(), obs, d, 0.05).objective();
    const auto mode = samplers::find_mode(F, Vector::Zero(3));
    const int n = int(state.range(0));
    for (auto _ : state) {
        auto ens = samplers::implicit_sample(F, mode, n, 7, exec);
        benchmark::DoNotOptimize(ens.weights.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_PceBuild, serial, Execution::Serial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PceBuild, parallel, Execution::Parallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ImplicitWeights, serial, Execution::Serial)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ImplicitWeights, parallel, Execution::Parallel)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
