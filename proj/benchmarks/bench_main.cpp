#include <benchmark/benchmark.h>

#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"
#include "tptest/influence.hpp"
#include "tptest/simulation.hpp"
#include "tptest/two_sample.hpp"

using namespace tptest;

namespace {

EventHistorySample sized_sample(int n, std::uint64_t seed, int group) {
  return simulate_illness_death(IllnessDeathConfig{n, 0.6, 0.5, 0.25}, seed,
                                group);
}

void BM_AalenJohansen(benchmark::State& state) {
  const EventHistorySample s = sized_sample(static_cast<int>(state.range(0)),
                                            11, 1);
  const CountingProcessSet cps(s);
  const EventGrid grid = pooled_event_grid({&s});
  for (auto _ : state) {
    const TransitionProbabilityCurve curve =
        aalen_johansen(nelson_aalen(cps, grid), 0.0);
    benchmark::DoNotOptimize(curve.value_at(grid.tau, 1, 2));
  }
  state.SetComplexityN(state.range(0));
}

void BM_InfluenceCurves(benchmark::State& state) {
  const EventHistorySample s = sized_sample(static_cast<int>(state.range(0)),
                                            12, 1);
  for (auto _ : state) {
    const InfluenceCurveSet set = influence_curves(s, 1, 2, 0.0);
    benchmark::DoNotOptimize(set.matrix().sum());
  }
  state.SetComplexityN(state.range(0));
}

void BM_MultiplierNull(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EventHistorySample a = sized_sample(n, 13, 1);
  const EventHistorySample b = sized_sample(n, 14, 2);
  const PreparedComparison prep = prepare_comparison(a, b, 1, 2, {});
  for (auto _ : state) {
    const NullSample ns = multiplier_null_sample(prep, 200, 7);
    benchmark::DoNotOptimize(ns.ks.back());
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_AalenJohansen)->Arg(100)->Arg(400)->Arg(1600)->Complexity();
BENCHMARK(BM_InfluenceCurves)->Arg(100)->Arg(400)->Arg(1600)->Complexity();
BENCHMARK(BM_MultiplierNull)->Arg(100)->Arg(400)->Arg(1600)->Complexity();

BENCHMARK_MAIN();
