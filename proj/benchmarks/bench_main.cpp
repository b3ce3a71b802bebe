#include <benchmark/benchmark.h>

#include <vector>

#include "ecofair/environment.hpp"
#include "ecofair/env_config.hpp"
#include "ecofair/fairness.hpp"
#include "ecofair/harness.hpp"
#include "ecofair/learner.hpp"
#include "ecofair/rng.hpp"

namespace {

using namespace ecofair;

EnvConfig fleet_16x50() {
  SyntheticNetworkSpec spec;
  return synthetic_env_config(spec);
}

void BM_EnvStep(benchmark::State& state) {
  Environment env(fleet_16x50());
  FleetState fleet = env.reset(7);
  MicroAction cruise;
  cruise.speed_level = 1;
  std::vector<MicroAction> micro(env.vessel_count(), cruise);
  for (auto _ : state) {
    if (fleet.t >= 200) fleet = env.reset(7);
    MacroAction macro;
    macro.epoch = fleet.t;
    macro.issued_at = fleet.t;
    for (const auto& v : fleet.vessels) macro.directives.push_back(v.directive);
    benchmark::DoNotOptimize(env.step(fleet, micro, macro));
  }
}
BENCHMARK(BM_EnvStep);

void BM_Gini(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> costs(static_cast<std::size_t>(state.range(0)));
  for (auto& c : costs) c = rng.uniform(0.0, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(gini(costs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gini)->RangeMultiplier(4)->Range(8, 2048)->Complexity(benchmark::oNLogN);

PolicySpec micro_spec() {
  PolicySpec spec;
  spec.features = kMicroFeatureCount;
  spec.actions = kMicroActionCount;
  return spec;
}

void BM_PolicyAct(benchmark::State& state) {
  LinearSoftmaxPolicy policy(micro_spec());
  Rng rng(5);
  std::vector<double> x(kMicroFeatureCount);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(policy.act(x, rng));
}
BENCHMARK(BM_PolicyAct);

void BM_PolicyUpdate(benchmark::State& state) {
  LinearSoftmaxPolicy policy(micro_spec());
  Rng rng(9);
  std::vector<Trajectory> batch(8, Trajectory(kMicroFeatureCount, kMicroActionCount));
  std::vector<double> x(kMicroFeatureCount);
  for (auto& tr : batch) {
    for (int t = 0; t < 50; ++t) {
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      const std::size_t i = tr.push(x, policy.act(x, rng).action);
      tr.set_reward(i, rng.uniform(-5.0, 0.0));
    }
  }
  ReturnBaseline baseline;
  for (auto _ : state) benchmark::DoNotOptimize(update(policy, batch, baseline));
}
BENCHMARK(BM_PolicyUpdate);

void BM_TrainingEpisode(benchmark::State& state) {
  RunConfig config;
  config.environment = fleet_16x50();
  config.horizon = 50;
  config.seeds = {1};
  config.constraints.budget_kg = 1e6;
  config.output.clear();
  ExperimentRun run(config, 1, 1e6);
  int episode = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run.run_episode(episode++));
}
BENCHMARK(BM_TrainingEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
