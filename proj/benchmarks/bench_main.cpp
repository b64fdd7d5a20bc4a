#include <benchmark/benchmark.h>

#include "conseqopt/bench.hpp"
#include "conseqopt/greedy.hpp"
#include "conseqopt/learning.hpp"
#include "conseqopt/objective.hpp"

using namespace conseqopt;

namespace {

StoredDataset scenario(int num_envs, int num_actions, int feature_len) {
  ScenarioConfig cfg;
  cfg.num_envs = num_envs;
  cfg.num_actions = num_actions;
  cfg.feature_len = feature_len;
  cfg.seed = 42;
  return generate_satisficing_dataset(cfg);
}

void BM_GreedyPerEnvironment(benchmark::State& state) {
  const StoredDataset stored =
      scenario(200, static_cast<int>(state.range(0)), 17);
  for (auto _ : state) {
    for (const Environment& env : stored.data.environments)
      benchmark::DoNotOptimize(greedy_per_environment(
          stored.objective, env, stored.data.library, 3));
  }
  state.SetItemsProcessed(state.iterations() * stored.data.num_envs());
}
BENCHMARK(BM_GreedyPerEnvironment)->Arg(10)->Arg(30)->Arg(100);

void BM_GreedyExpected(benchmark::State& state) {
  const StoredDataset stored =
      scenario(static_cast<int>(state.range(0)), 30, 17);
  for (auto _ : state)
    benchmark::DoNotOptimize(greedy_expected(stored.objective, stored.data, 3));
}
BENCHMARK(BM_GreedyExpected)->Arg(100)->Arg(500);

void BM_BruteForce(benchmark::State& state) {
  const StoredDataset stored =
      scenario(20, static_cast<int>(state.range(0)), 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        brute_force_optimal(stored.objective, stored.data, 3, true));
}
BENCHMARK(BM_BruteForce)->Arg(6)->Arg(12)->Arg(20);

void BM_TrainClassification(benchmark::State& state) {
  const StoredDataset stored =
      scenario(static_cast<int>(state.range(0)), 30, 17);
  for (auto _ : state)
    benchmark::DoNotOptimize(train_conseqopt_classification(
        stored.data, stored.objective, 3, 1e-6, true));
}
BENCHMARK(BM_TrainClassification)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_TrainRegression(benchmark::State& state) {
  const StoredDataset stored =
      scenario(static_cast<int>(state.range(0)), 30, 17);
  const ActionFeatureFn features =
      per_action_affine_features(stored.data.library.size);
  for (auto _ : state)
    benchmark::DoNotOptimize(train_conseqopt_regression(
        stored.data, stored.objective, 3, 1e-6, features, "per_action_affine",
        true));
}
BENCHMARK(BM_TrainRegression)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_PredictSequence(benchmark::State& state) {
  const StoredDataset stored = scenario(200, 30, 17);
  const SequencePredictor predictor = train_conseqopt_classification(
      stored.data, stored.objective, 3, 1e-6, true);
  for (auto _ : state) {
    for (const Environment& env : stored.data.environments)
      benchmark::DoNotOptimize(predict_sequence(predictor, env));
  }
  state.SetItemsProcessed(state.iterations() * stored.data.num_envs());
}
BENCHMARK(BM_PredictSequence);

}  // namespace

BENCHMARK_MAIN();
