#include <benchmark/benchmark.h>

#include "surgesim/analysis.hpp"
#include "surgesim/market.hpp"
#include "surgesim/rng.hpp"
#include "surgesim/stochastic.hpp"

namespace {

const surge::TheoryParams kSpillOver{30, 50, 1000, 200, 0.005, 600, 1e-9};

void BM_simulate_fluid(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(surge::simulate(kSpillOver));
}
BENCHMARK(BM_simulate_fluid);

void BM_simulate_stochastic(benchmark::State& state) {
  const auto params = surge::StochasticParams::make(
      kSpillOver, surge::ArrivalKind::poisson, surge::ArrivalKind::poisson, 7);
  for (auto _ : state) benchmark::DoNotOptimize(surge::simulate_stochastic(params));
}
BENCHMARK(BM_simulate_stochastic);

void BM_poisson(benchmark::State& state) {
  surge::RandomStream rng(1);
  const double mean = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rng.poisson(mean));
}
BENCHMARK(BM_poisson)->Arg(4)->Arg(30)->Arg(90);

surge::AgentParams market_params() {
  surge::AgentParams p;
  p.lambda = 30;
  p.mu = 45;
  p.d0_surge = 2000;
  p.d0_nonsurge = 250;
  p.horizon = 1200;
  p.seed = 1;
  p.cost_dist = surge::TruncatedNormalSpec{8.0, 8.0};
  p.wtp_dist = surge::TruncatedNormalSpec{7.0, 2.0};
  p.pricing = surge::PricingConfig{0.3, 1.0, 10.0};
  return p;
}

void BM_market_run(benchmark::State& state) {
  const surge::AgentParams params = market_params();
  for (auto _ : state) benchmark::DoNotOptimize(surge::simulate_market(params));
}
BENCHMARK(BM_market_run);

void BM_audit_bounds(benchmark::State& state) {
  const surge::Trajectory traj = surge::simulate(kSpillOver);
  for (auto _ : state) benchmark::DoNotOptimize(surge::audit_bounds(traj));
}
BENCHMARK(BM_audit_bounds);

}  // namespace

BENCHMARK_MAIN();
