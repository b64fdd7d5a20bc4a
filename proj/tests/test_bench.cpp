#include <doctest.h>

#include <nlohmann/json.hpp>

#include "conseqopt/bench.hpp"
#include "conseqopt/greedy.hpp"
#include "conseqopt/objective.hpp"

using namespace conseqopt;

namespace {

ScenarioConfig small_satisficing() {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::SatisficingSeeds;
  cfg.num_envs = 60;
  cfg.num_actions = 8;
  cfg.num_slots = 3;
  cfg.feature_len = 6;
  cfg.noise = 0.1;
  cfg.seed = 7;
  return cfg;
}

ScenarioConfig small_navigation() {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::Navigation;
  cfg.num_envs = 40;
  cfg.num_actions = 6;
  cfg.num_slots = 2;
  cfg.feature_len = 8;
  cfg.obstacle_density = 0.12;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("scenario config validation names the offending field") {
  ScenarioConfig cfg = small_satisficing();
  cfg.obstacle_density = 1.5;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("obstacle_density") != std::string::npos);
  }
  cfg = small_satisficing();
  cfg.num_envs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("scenario config json round trip") {
  const ScenarioConfig cfg = small_navigation();
  const ScenarioConfig restored =
      scenario_config_from_json(scenario_config_to_json(cfg));
  CHECK(scenario_config_to_json(restored) == scenario_config_to_json(cfg));
}

TEST_CASE("satisficing generator") {
  const ScenarioConfig cfg = small_satisficing();
  const StoredDataset a = generate_satisficing_dataset(cfg);
  a.data.validate();
  CHECK(a.data.num_envs() == cfg.num_envs);
  CHECK(a.data.feature_len() == cfg.feature_len);
  CHECK(a.objective.kind == ObjectiveKind::SatisficingProbability);

  SUBCASE("deterministic under seed") {
    const StoredDataset b = generate_satisficing_dataset(cfg);
    for (int e = 0; e < cfg.num_envs; ++e) {
      CHECK(a.data.environments[e].features == b.data.environments[e].features);
      CHECK(a.data.environments[e].action_costs ==
            b.data.environments[e].action_costs);
    }
  }
  SUBCASE("failing actions carry the max penalty") {
    for (const Environment& env : a.data.environments)
      for (int i = 0; i < cfg.num_actions; ++i) {
        if (!env.action_success[i])
          CHECK(env.action_costs[i] == cfg.t_fail);
        else
          CHECK(env.action_costs[i] < cfg.t_fail);
      }
  }
}

TEST_CASE("navigation generator") {
  const ScenarioConfig cfg = small_navigation();
  const StoredDataset a = generate_navigation_dataset(cfg);
  a.data.validate();
  CHECK(a.data.num_envs() == cfg.num_envs);

  SUBCASE("deterministic under seed") {
    const StoredDataset b = generate_navigation_dataset(cfg);
    CHECK(b.objective.normalizer == a.objective.normalizer);
    for (int e = 0; e < cfg.num_envs; ++e)
      CHECK(a.data.environments[e].action_costs ==
            b.data.environments[e].action_costs);
  }
  SUBCASE("costs stay within the normalizer") {
    for (const Environment& env : a.data.environments)
      for (double c : env.action_costs) CHECK(c <= a.objective.normalizer);
  }
  SUBCASE("empty map leaves every trajectory collision-free") {
    ScenarioConfig open = cfg;
    open.obstacle_density = 0.0;
    const StoredDataset d = generate_navigation_dataset(open);
    // no clamped costs anywhere: the max is attained by a real path cost
    for (const Environment& env : d.data.environments) {
      int clamped = 0;
      for (double c : env.action_costs)
        if (c == d.objective.normalizer) ++clamped;
      CHECK(clamped <= 1);  // at most the single worst finite path
    }
  }
}

TEST_CASE("trajectory library starts at the robot cell") {
  const ScenarioConfig cfg = small_navigation();
  const TrajectoryLibrary library = build_trajectory_library(cfg);
  CHECK(static_cast<int>(library.trajectories.size()) == cfg.num_actions);
  for (const auto& cells : library.trajectories) {
    REQUIRE(!cells.empty());
    CHECK(cells.front() == std::make_pair(1, cfg.grid_height / 2));
    CHECK(cells.size() >= 2);
  }
}

TEST_CASE("split_dataset") {
  const StoredDataset stored = generate_satisficing_dataset(small_satisficing());
  const auto [train, test] = split_dataset(stored.data, 0.6, 7);
  CHECK(train.num_envs() == 36);
  CHECK(test.num_envs() == 24);
  const auto [train2, test2] = split_dataset(stored.data, 0.6, 7);
  CHECK(train.environments[0].id == train2.environments[0].id);
  CHECK_THROWS_AS(split_dataset(stored.data, 1.5, 7), ConfigError);
}

TEST_CASE("baseline orderings") {
  const ScenarioConfig cfg = small_satisficing();
  const StoredDataset stored = generate_satisficing_dataset(cfg);
  const auto [train, test] = split_dataset(stored.data, 0.6, cfg.seed);

  SUBCASE("random is reproducible and permutation-valid") {
    const auto a = baseline_order(test, stored.objective, BaselineKind::Random,
                                  3, 11);
    const auto b = baseline_order(test, stored.objective, BaselineKind::Random,
                                  3, 11);
    CHECK(a == b);
    for (const Sequence& s : a) {
      CHECK(s.size() == 3);
      CHECK(Sequence(s.begin(), s.end()) == s);
      for (ActionId id : s) CHECK(id < cfg.num_actions);
    }
  }
  SUBCASE("success-rate puts the most successful action first") {
    const auto seqs = baseline_order(test, stored.objective,
                                     BaselineKind::SuccessRateSorted, 3, 0,
                                     &train);
    std::vector<int> counts(cfg.num_actions, 0);
    for (const Environment& env : train.environments)
      for (int a = 0; a < cfg.num_actions; ++a)
        if (env.action_success[a]) ++counts[a];
    const int top = seqs[0][0];
    for (int a = 0; a < cfg.num_actions; ++a) CHECK(counts[top] >= counts[a]);
  }
  SUBCASE("static greedy matches greedy_expected") {
    const auto seqs = baseline_order(test, stored.objective,
                                     BaselineKind::StaticGreedy, 3, 0, &train);
    CHECK(seqs[0] == greedy_expected(stored.objective, train, 3).sequence);
  }
  SUBCASE("absolute-benefit shares slot 1 with the alg2 predictor") {
    const auto predictor = train_conseqopt_regression(
        train, stored.objective, 3, 1e-6,
        per_action_affine_features(cfg.num_actions), "per_action_affine",
        true);
    const auto seqs = baseline_order(test, stored.objective,
                                     BaselineKind::AbsoluteBenefitSorted, 3, 0,
                                     nullptr, &predictor);
    for (int e = 0; e < test.num_envs(); ++e)
      CHECK(seqs[e][0] ==
            predict_sequence(predictor, test.environments[e])[0]);
  }
  SUBCASE("missing predictor is a config error") {
    CHECK_THROWS_AS(baseline_order(test, stored.objective,
                                   BaselineKind::AbsoluteBenefitSorted, 3),
                    ConfigError);
  }
}

TEST_CASE("run_comparison invariants") {
  const ScenarioConfig cfg = small_satisficing();
  const StoredDataset stored = generate_satisficing_dataset(cfg);
  const auto [train, test] = split_dataset(stored.data, 0.6, cfg.seed);
  const std::vector<std::string> methods = {
      "random", "success-rate", "absolute-benefit",
      "static-greedy", "conseqopt-alg1", "conseqopt-alg2"};
  const ComparisonReport report =
      run_comparison(train, test, stored.objective, methods, cfg.num_slots,
                     cfg.lambda, cfg.t_fail, cfg.seed);

  CHECK(report.curves.size() == methods.size());
  for (const MethodCurve& curve : report.curves) {
    for (int n = 1; n < cfg.num_slots; ++n) {
      CHECK(curve.failures[n] <= curve.failures[n - 1]);
      CHECK(curve.mean_f[n] >= curve.mean_f[n - 1] - 1e-12);
      CHECK(curve.mean_exec_time[n] <= curve.mean_exec_time[n - 1] + 1e-12);
    }
  }

  SUBCASE("deterministic") {
    const ComparisonReport again =
        run_comparison(train, test, stored.objective, methods, cfg.num_slots,
                       cfg.lambda, cfg.t_fail, cfg.seed);
    CHECK(comparison_report_to_json(again).dump() ==
          comparison_report_to_json(report).dump());
  }
  SUBCASE("serializes to json and a text table") {
    const nlohmann::json j = comparison_report_to_json(report);
    CHECK(j.at("methods").size() == methods.size());
    const std::string text = comparison_report_to_text(report);
    CHECK(text.find("conseqopt-alg2") != std::string::npos);
  }
}

TEST_CASE("noise-free separable scenario is solved at depth 1") {
  ScenarioConfig cfg = small_satisficing();
  cfg.noise = 0.0;
  cfg.num_envs = 80;
  const StoredDataset stored = generate_satisficing_dataset(cfg);
  // keep only environments that any action can satisfy
  Dataset solvable;
  solvable.library = stored.data.library;
  for (const Environment& env : stored.data.environments) {
    bool any = false;
    for (char s : env.action_success) any = any || s;
    if (any) solvable.environments.push_back(env);
  }
  REQUIRE(solvable.num_envs() > 20);

  const auto predictor = train_conseqopt_classification(
      solvable, stored.objective, 1, 1e-6, true);
  int failures = 0;
  for (const Environment& env : solvable.environments) {
    const Sequence seq = predict_sequence(predictor, env);
    if (eval_sequence(stored.objective, env, seq) == 0.0) ++failures;
  }
  // training-set fit on clean features should be near-perfect
  CHECK(failures <= solvable.num_envs() / 10);
}
