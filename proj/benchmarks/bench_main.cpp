#include <benchmark/benchmark.h>

#include "qlag/analytics.hpp"
#include "qlag/bayes.hpp"
#include "qlag/distributions.hpp"
#include "qlag/simulator.hpp"

namespace {

using namespace qlag;

void BM_FixedLag(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto traj = run_fixed_lag(Exponential{1.0}, Exponential{0.33}, 0.5, n, Stationary{}, seed++);
    benchmark::DoNotOptimize(traj.jobs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FixedLag)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_RewardEstimate(benchmark::State& state) {
  const auto traj = run_fixed_lag(Uniform{0.0, 2.0}, Uniform{0.0, 0.66}, 0.3, 1000000, Stationary{}, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_reward(traj, ExponentialReward{1.0}, WindowAll{}));
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_RewardEstimate)->Unit(benchmark::kMillisecond);

void BM_ExactSetup(benchmark::State& state) {
  for (auto _ : state) {
    ExactRewardEvaluator eval(TruncatedNormal{1.0, 0.5, 0.0, 2.0}, Exponential{0.33},
                              ExponentialReward{1.0});
    benchmark::DoNotOptimize(eval(0.0).value);
  }
}
BENCHMARK(BM_ExactSetup)->Unit(benchmark::kMillisecond);

void BM_ExactLag(benchmark::State& state) {
  const ExactRewardEvaluator eval(Uniform{0.0, 2.0}, Exponential{0.33}, ExponentialReward{1.0});
  double lag = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval(lag).value);
    lag = lag < 3.0 ? lag + 0.05 : 0.0;
  }
}
BENCHMARK(BM_ExactLag)->Unit(benchmark::kMicrosecond);

void BM_Surrogate(benchmark::State& state) {
  double lag = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(surrogate_reward(Exponential{1.0}, Exponential{0.33}, 1.0, lag));
    lag = lag < 3.0 ? lag + 0.05 : 0.0;
  }
}
BENCHMARK(BM_Surrogate);

void BM_Adaptive(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto r = run_adaptive(Exponential{1.0}, Exponential{0.33}, Stationary{}, ExponentialReward{1.0},
                          50000, BayesConfig{}, seed++, ReportLastK{5000});
    benchmark::DoNotOptimize(r.reward);
  }
  state.SetItemsProcessed(state.iterations() * 50000);
}
BENCHMARK(BM_Adaptive)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
