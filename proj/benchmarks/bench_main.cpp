#include <benchmark/benchmark.h>

#include "ratiomom/exact_moments.hpp"
#include "ratiomom/montecarlo.hpp"
#include "ratiomom/numerics.hpp"
#include "ratiomom/severity.hpp"

using namespace ratiomom;

static void BM_LogExpint(benchmark::State& state) {
  double z = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::log_expint_e(-2.5, z));
    z = z < 10.0 ? z * 1.01 : 1e-3;
  }
}
BENCHMARK(BM_LogExpint);

static void BM_LaplaceDerivLogPareto(benchmark::State& state) {
  const auto sev = severity::SeverityModel::log_pareto(2.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(severity::log_abs_laplace_deriv(sev, 2, 0.05));
}
BENCHMARK(BM_LaplaceDerivLogPareto);

static void BM_MomentTk(benchmark::State& state) {
  const auto sev = severity::SeverityModel::strict_pareto(1.5);
  const auto mix = mixing::MixingModel::degenerate(1.0);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact::moment_tk(sev, mix, 1e4, k).value);
}
BENCHMARK(BM_MomentTk)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_SampleT(benchmark::State& state) {
  const auto sev = severity::SeverityModel::strict_pareto(3.0);
  const auto mix = mixing::MixingModel::gamma(2.0, 2.0);
  Rng rng = stream_rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(montecarlo::sample_T(sev, mix, 50.0, rng).T);
}
BENCHMARK(BM_SampleT);
BENCHMARK_MAIN();
