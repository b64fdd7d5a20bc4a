// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "conseqopt/bench.hpp"
#include "conseqopt/dataset_io.hpp"
#include "conseqopt/greedy.hpp"
#include "conseqopt/learning.hpp"
#include "conseqopt/objective.hpp"
#include "conseqopt/rng.hpp"

using namespace conseqopt;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
  std::printf("%-28s %s%s%s\n", name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  if (!ok) ++g_failures;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Criterion: clairvoyant greedy >= (1 - 1/e) OPT - 1e-9 on every one of
// >= 500 random instances, both objectives, under 60 s.
void greedy_guarantee() {
  const auto start = std::chrono::steady_clock::now();
  int checked = 0;
  bool ok = true;
  for (int i = 0; i < 250 && ok; ++i) {
    for (ObjectiveKind kind : {ObjectiveKind::BestActionCost,
                               ObjectiveKind::SatisficingProbability}) {
      std::mt19937_64 rng = make_rng(1000, "accept-greedy", i);
      const int num_actions = 2 + static_cast<int>(rng() % 5);  // <= 6
      const int num_slots = 1 + static_cast<int>(rng() % 3);    // <= 3
      const int num_envs = 2 + static_cast<int>(rng() % 19);    // <= 20
      const auto inst = random_instance(kind, num_envs, num_actions,
                                        stream_seed(1000, "accept-inst", i));
      double greedy_value = 0.0;
      for (const Environment& env : inst.data.environments)
        greedy_value += eval_sequence(
            inst.objective, env,
            greedy_per_environment(inst.objective, env, inst.data.library,
                                   num_slots)
                .sequence);
      greedy_value /= inst.data.num_envs();
      const auto opt =
          brute_force_optimal(inst.objective, inst.data, num_slots, true);
      ok = ok && verify_approx_bound(greedy_value, opt.value, {}).holds;
      ++checked;
    }
  }
  const double secs = elapsed_seconds(start);
  std::ostringstream detail;
  detail << checked << " instances, " << secs << " s";
  report("greedy-guarantee", ok && checked >= 500 && secs < 60.0,
         detail.str());
}

// Criterion: 10,000 sampled triples per objective with zero violations, and
// an injected non-submodular counterfeit caught, under 10 s.
void submodularity() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng = make_rng(1001, "accept-sub");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Environment cost_env;
  cost_env.id = "sub-cost";
  cost_env.features = {0.0};
  cost_env.action_costs.resize(8);
  for (double& c : cost_env.action_costs) c = unit(rng);
  const ObjectiveSpec cost_obj{ObjectiveKind::BestActionCost, 1.0};
  const int cost_violations =
      check_monotone_submodular(cost_obj, cost_env, 10000, 2024).violations;

  Environment sat_env;
  sat_env.id = "sub-sat";
  sat_env.features = {0.0};
  sat_env.action_success = {0, 1, 0, 0, 1, 0, 0, 1};
  const ObjectiveSpec sat_obj{ObjectiveKind::SatisficingProbability, 1.0};
  const int sat_violations =
      check_monotone_submodular(sat_obj, sat_env, 10000, 2024).violations;

  // Counterfeit: one action's value grows once another has appeared.
  auto corrupted = [](const Sequence& s) {
    double value = 0.0;
    bool primed = false;
    for (ActionId a : s) {
      if (a == 0) primed = true;
      if (a == 1) value += primed ? 0.9 : 0.1;
    }
    return value;
  };
  const int corrupt_violations =
      check_monotone_submodular(corrupted, 4, 10000, 2024).violations;

  const double secs = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "violations " << cost_violations << "/" << sat_violations
         << ", counterfeit " << corrupt_violations << ", " << secs << " s";
  report("submodularity",
         cost_violations == 0 && sat_violations == 0 &&
             corrupt_violations >= 1 && secs < 10.0,
         detail.str());
}

// Criterion: with one-hot features and lambda = 1e-8, both algorithms
// reproduce the clairvoyant greedy trace on every training environment for
// >= 50 seeded instances, under 60 s.
void reduction_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  int instances = 0;
  for (int i = 0; i < 50 && ok; ++i) {
    const ObjectiveKind kind = i % 2 == 0
                                   ? ObjectiveKind::BestActionCost
                                   : ObjectiveKind::SatisficingProbability;
    std::mt19937_64 rng = make_rng(1002, "accept-fidelity", i);
    const int num_actions = 3 + static_cast<int>(rng() % 3);
    const int num_envs = 6 + static_cast<int>(rng() % 8);
    const auto inst = random_instance(kind, num_envs, num_actions,
                                      stream_seed(1002, "fid-inst", i));
    const int num_slots = 3;

    const auto alg1 = train_conseqopt_classification(
        inst.data, inst.objective, num_slots, 1e-8, false);
    auto kron = [num_actions](const Environment& env, ActionId a) {
      const int len = static_cast<int>(env.features.size());
      Eigen::VectorXd row = Eigen::VectorXd::Zero(num_actions * len);
      for (int j = 0; j < len; ++j) row[a * len + j] = env.features[j];
      return row;
    };
    const auto alg2 = train_conseqopt_regression(
        inst.data, inst.objective, num_slots, 1e-8, kron, "custom", false);

    for (const Environment& env : inst.data.environments) {
      const Sequence target =
          greedy_per_environment(inst.objective, env, inst.data.library,
                                 num_slots)
              .sequence;
      ok = ok && predict_sequence(alg1, env) == target;
      ok = ok && predict_sequence(alg2, env, kron) == target;
    }
    ++instances;
  }
  const double secs = elapsed_seconds(start);
  std::ostringstream detail;
  detail << instances << " instances, " << secs << " s";
  report("reduction-fidelity", ok && instances >= 50 && secs < 60.0,
         detail.str());
}

// Criterion: learned expected value >= (1 - 1/e) OPT_static - sum(slot loss)
// on every brute-forceable instance, and the regression-slack arithmetic is
// exact on the fixture.
void learned_bound() {
  bool ok = true;
  for (int i = 0; i < 40 && ok; ++i) {
    const ObjectiveKind kind = i % 2 == 0
                                   ? ObjectiveKind::BestActionCost
                                   : ObjectiveKind::SatisficingProbability;
    const auto inst = random_instance(kind, 10, 5,
                                      stream_seed(1003, "accept-t1", i));
    const auto predictor = train_conseqopt_classification(
        inst.data, inst.objective, 3, 1e-8, false);
    std::vector<Sequence> seqs;
    for (const Environment& env : inst.data.environments)
      seqs.push_back(predict_sequence(predictor, env));
    const double achieved = expected_value(inst.objective, inst.data, seqs);
    const auto opt = brute_force_optimal(inst.objective, inst.data, 3, false);
    ok = verify_approx_bound(achieved, opt.value, predictor.report.slot_loss)
             .holds;
  }
  const double slack = reduction_slack({0.02}, 2)[0];
  const bool slack_ok = std::abs(slack - 0.2) <= 1e-12;
  std::ostringstream detail;
  detail << "slack(|V|=2, r=0.02) = " << slack;
  report("learned-bound", ok && slack_ok, detail.str());
}

bool strict_less(double a, double b) { return a < b; }

// Criterion: on the default satisficing scenario, final-depth failures and
// penalized execution time both satisfy conseqopt < absolute-benefit <
// random, on seed 42 and on >= 8 of 10 alternative seeds. Under 5 min.
void trajectory_trend() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> methods = {"random", "absolute-benefit",
                                            "conseqopt-alg2"};
  auto trend_holds = [&](std::uint64_t seed, std::string* detail) {
    ScenarioConfig cfg;  // defaults: 500 envs, |V|=30, L=17, N=3, 60/40
    cfg.seed = seed;
    const StoredDataset stored = generate_satisficing_dataset(cfg);
    const auto [train, test] =
        split_dataset(stored.data, cfg.train_ratio, cfg.seed);
    const ComparisonReport rep =
        run_comparison(train, test, stored.objective, methods, cfg.num_slots,
                       cfg.lambda, cfg.t_fail, cfg.seed);
    const int last = cfg.num_slots - 1;
    const MethodCurve& ours = *rep.find("conseqopt-alg2");
    const MethodCurve& abs = *rep.find("absolute-benefit");
    const MethodCurve& rnd = *rep.find("random");
    if (detail) {
      std::ostringstream out;
      out << "failures " << ours.failures[last] << "<" << abs.failures[last]
          << "<" << rnd.failures[last] << ", exec "
          << ours.mean_exec_time[last] << "<" << abs.mean_exec_time[last]
          << "<" << rnd.mean_exec_time[last];
      *detail = out.str();
    }
    return ours.failures[last] < abs.failures[last] &&
           abs.failures[last] < rnd.failures[last] &&
           strict_less(ours.mean_exec_time[last], abs.mean_exec_time[last]) &&
           strict_less(abs.mean_exec_time[last], rnd.mean_exec_time[last]);
  };

  std::string shipped_detail;
  const bool shipped = trend_holds(42, &shipped_detail);
  int alt_hold = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed)
    if (trend_holds(seed, nullptr)) ++alt_hold;
  const double secs = elapsed_seconds(start);
  std::ostringstream detail;
  detail << "seed42 [" << shipped_detail << "], alt " << alt_hold << "/10, "
         << secs << " s";
  report("trajectory-trend", shipped && alt_hold >= 8 && secs < 300.0,
         detail.str());
}

// Criterion: ConSeqOpt (Algorithm 1) mean traversal cost <= StaticGreedy on
// the default navigation scenario for >= 8 of 10 seeds.
void navigation_trend() {
  const auto start = std::chrono::steady_clock::now();
  int hold = 0;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::Navigation;
    cfg.seed = seed;
    const StoredDataset stored = generate_navigation_dataset(cfg);
    const auto [train, test] =
        split_dataset(stored.data, cfg.train_ratio, cfg.seed);
    const ComparisonReport rep = run_comparison(
        train, test, stored.objective, {"static-greedy", "conseqopt-alg1"},
        cfg.num_slots, cfg.lambda, stored.objective.normalizer, cfg.seed);
    const int last = cfg.num_slots - 1;
    if (rep.find("conseqopt-alg1")->mean_exec_time[last] <=
        rep.find("static-greedy")->mean_exec_time[last])
      ++hold;
  }
  const double secs = elapsed_seconds(start);
  std::ostringstream detail;
  detail << hold << "/10 seeds, " << secs << " s";
  report("navigation-trend", hold >= 8, detail.str());
}

// Criterion: byte-identical artifacts across reruns, lossless model
// round-trip, and the normal-equation residual <= 1e-8 on fixtures.
void determinism_roundtrip() {
  bool ok = true;

  ScenarioConfig cfg;
  cfg.num_envs = 100;
  cfg.seed = 42;
  const fs::path dir = fs::temp_directory_path() / "conseqopt_accept";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto write_once = [&](const std::string& tag) {
    const StoredDataset stored = generate_satisficing_dataset(cfg);
    save_dataset(stored, (dir / (tag + ".json")).string(),
                 (dir / (tag + ".jsonl")).string());
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };
  write_once("a");
  write_once("b");
  ok = ok && slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl");
  ok = ok && slurp(dir / "a.json") == slurp(dir / "b.json");

  const StoredDataset stored = generate_satisficing_dataset(cfg);
  const auto predictor = train_conseqopt_regression(
      stored.data, stored.objective, 2, 1e-6,
      per_action_affine_features(cfg.num_actions), "per_action_affine", true);
  const std::string dumped = predictor_to_json(predictor).dump();
  const auto restored =
      predictor_from_json(nlohmann::json::parse(dumped));
  ok = ok && predictor_to_json(restored).dump() == dumped;
  for (const Environment& env : stored.data.environments)
    ok = ok && predict_sequence(restored, env) == predict_sequence(predictor, env);

  std::mt19937_64 rng = make_rng(7, "accept-ridge");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double lambda : {1e-8, 1e-6, 1e-2, 1.0}) {
    Eigen::MatrixXd features(40, 9);
    Eigen::VectorXd targets(40);
    for (int r = 0; r < 40; ++r) {
      for (int c = 0; c < 9; ++c) features(r, c) = gauss(rng);
      targets[r] = gauss(rng);
    }
    const Eigen::VectorXd w = ridge_fit(features, targets, lambda);
    const double residual =
        ((features.transpose() * features +
          lambda * Eigen::MatrixXd::Identity(9, 9)) *
             w -
         features.transpose() * targets)
            .lpNorm<Eigen::Infinity>();
    ok = ok && residual <= 1e-8;
  }
  fs::remove_all(dir);
  report("determinism-roundtrip", ok);
}

}  // namespace

int main() {
  greedy_guarantee();
  submodularity();
  reduction_fidelity();
  learned_bound();
  trajectory_trend();
  navigation_trend();
  determinism_roundtrip();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
