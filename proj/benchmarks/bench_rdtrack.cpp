#include <benchmark/benchmark.h>

#include <cmath>

#include "rdtrack/ba.hpp"
#include "rdtrack/builtins.hpp"
#include "rdtrack/implicit.hpp"
#include "rdtrack/oracles.hpp"
#include "rdtrack/sympoly.hpp"
#include "rdtrack/tensors.hpp"
#include "rdtrack/tracker.hpp"

using namespace rdtrack;

namespace {

void BM_BaStep(benchmark::State& state) {
  RdProblem problem = fig3_problem();
  Marginal r = Marginal::uniform(4);
  for (auto _ : state) benchmark::DoNotOptimize(ba_step(problem, r, 4.0));
}
BENCHMARK(BM_BaStep);

void BM_BaFixedPoint(benchmark::State& state) {
  RdProblem problem = fig3_problem();
  double beta = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(ba_fixed_point(problem, Marginal::uniform(4), beta, {1e-8, 1000000}));
}
BENCHMARK(BM_BaFixedPoint)->Arg(16)->Arg(6)->Arg(3);

void BM_GenerateP(benchmark::State& state) {
  // regeneration from scratch is not reachable through the cached API, so
  // rebuild the chain explicitly
  const int k_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SymbolicPolynomial p = SymbolicPolynomial::constant(1);
    SymbolicPolynomial step =
        SymbolicPolynomial::variable(1) - SymbolicPolynomial::variable(0);
    for (int k = 0; k < k_max; ++k) p = step * p + derive(p);
    benchmark::DoNotOptimize(p.monomial_count());
  }
}
BENCHMARK(BM_GenerateP)->Arg(8)->Arg(14)->Arg(20);

void BM_PointScratch(benchmark::State& state) {
  RdProblem problem = fig3_problem();
  const int order = static_cast<int>(state.range(0));
  FixedPointResult res = ba_fixed_point(problem, Marginal::uniform(4), 16.0, {1e-12, 1000000});
  for (auto _ : state)
    benchmark::DoNotOptimize(PointScratch::build(problem, res.marginal, 16.0, order));
}
BENCHMARK(BM_PointScratch)->Arg(3)->Arg(5)->Arg(7);

void BM_ImplicitDerivatives(benchmark::State& state) {
  RdProblem problem = fig3_problem();
  const int order = static_cast<int>(state.range(0));
  FixedPointResult res = ba_fixed_point(problem, Marginal::uniform(4), 16.0, {1e-12, 1000000});
  for (auto _ : state) {
    RdTensorProvider provider(problem, res.marginal, 16.0, order);
    benchmark::DoNotOptimize(implicit_derivatives(provider, order));
  }
}
BENCHMARK(BM_ImplicitDerivatives)->DenseRange(1, 7);

void BM_RootTrackHamming(benchmark::State& state) {
  RdProblem problem = binary_hamming_problem(0.3);
  TrackConfig config;
  config.beta0 = 32.0;
  config.beta_min = 0.5;
  config.spacing = GridSpacing::log2;
  config.points = static_cast<int>(state.range(0));
  config.order = 3;
  for (auto _ : state) benchmark::DoNotOptimize(root_track(problem, config));
}
BENCHMARK(BM_RootTrackHamming)->Arg(100)->Arg(300);

void BM_RootTrackFig3(benchmark::State& state) {
  RdProblem problem = fig3_problem();
  TrackConfig config;
  config.beta0 = 20.0;
  config.beta_min = 1e-3;
  config.step = -0.05;
  config.order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(root_track(problem, config));
}
BENCHMARK(BM_RootTrackFig3)->Arg(3)->Arg(5)->Arg(7);

}  // namespace

BENCHMARK_MAIN();
