#include "conseqopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conseqopt/greedy.hpp"
#include "conseqopt/objective.hpp"
#include "conseqopt/rng.hpp"

namespace conseqopt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ScenarioConfig::validate() const {
  auto positive = [](int v, const char* field) {
    if (v < 1) throw ConfigError(std::string(field) + " must be >= 1");
  };
  positive(num_envs, "num_envs");
  positive(num_actions, "num_actions");
  positive(num_slots, "num_slots");
  positive(feature_len, "feature_len");
  if (noise < 0.0) throw ConfigError("noise must be >= 0");
  if (obstacle_density < 0.0 || obstacle_density > 1.0)
    throw ConfigError("obstacle_density must be in [0,1] (got " +
                      std::to_string(obstacle_density) + ")");
  if (t_fail <= 0.0) throw ConfigError("t_fail must be > 0");
  if (train_ratio <= 0.0 || train_ratio >= 1.0)
    throw ConfigError("train_ratio must be in (0,1)");
  if (lambda <= 0.0) throw ConfigError("lambda must be > 0");
  if (kind == ScenarioKind::Navigation) {
    if (grid_width < 8 || grid_height < 8)
      throw ConfigError("grid_width/grid_height must be >= 8");
    if (trajectory_len < 2) throw ConfigError("trajectory_len must be >= 2");
  }
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  try {
    const std::string kind = j.value("kind", std::string("satisficing_seeds"));
    if (kind == "navigation")
      cfg.kind = ScenarioKind::Navigation;
    else if (kind == "satisficing_seeds")
      cfg.kind = ScenarioKind::SatisficingSeeds;
    else
      throw ConfigError("unknown scenario kind: " + kind);
    cfg.num_envs = j.value("num_envs", cfg.num_envs);
    cfg.num_actions = j.value("num_actions", cfg.num_actions);
    cfg.num_slots = j.value("num_slots", cfg.num_slots);
    cfg.feature_len = j.value("feature_len", cfg.feature_len);
    cfg.noise = j.value("noise", cfg.noise);
    cfg.obstacle_density = j.value("obstacle_density", cfg.obstacle_density);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.t_fail = j.value("t_fail", cfg.t_fail);
    cfg.train_ratio = j.value("train_ratio", cfg.train_ratio);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.standardize = j.value("standardize", cfg.standardize);
    cfg.grid_width = j.value("grid_width", cfg.grid_width);
    cfg.grid_height = j.value("grid_height", cfg.grid_height);
    cfg.trajectory_len = j.value("trajectory_len", cfg.trajectory_len);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json scenario_config_to_json(const ScenarioConfig& cfg) {
  return nlohmann::json{
      {"kind", cfg.kind == ScenarioKind::Navigation ? "navigation"
                                                    : "satisficing_seeds"},
      {"num_envs", cfg.num_envs},
      {"num_actions", cfg.num_actions},
      {"num_slots", cfg.num_slots},
      {"feature_len", cfg.feature_len},
      {"noise", cfg.noise},
      {"obstacle_density", cfg.obstacle_density},
      {"seed", cfg.seed},
      {"t_fail", cfg.t_fail},
      {"train_ratio", cfg.train_ratio},
      {"lambda", cfg.lambda},
      {"standardize", cfg.standardize},
      {"grid_width", cfg.grid_width},
      {"grid_height", cfg.grid_height},
      {"trajectory_len", cfg.trajectory_len}};
}

TrajectoryLibrary build_trajectory_library(const ScenarioConfig& cfg) {
  std::mt19937_64 rng = make_rng(cfg.seed, "nav-library");
  std::uniform_real_distribution<double> curvature_dist(-0.18, 0.18);

  const int start_x = 1;
  const int start_y = cfg.grid_height / 2;

  TrajectoryLibrary library;
  library.trajectories.resize(cfg.num_actions);
  for (int a = 0; a < cfg.num_actions; ++a) {
    // Headings fan over [-70, 70] degrees; curvature bends each arc.
    const double spread =
        cfg.num_actions == 1
            ? 0.0
            : (static_cast<double>(a) / (cfg.num_actions - 1) - 0.5) * 2.0;
    double heading = spread * 70.0 * kPi / 180.0;
    const double curvature = curvature_dist(rng);

    auto& cells = library.trajectories[a];
    cells.emplace_back(start_x, start_y);
    double x = start_x, y = start_y;
    for (int step = 0; step < cfg.trajectory_len; ++step) {
      heading += curvature;
      x += std::cos(heading);
      y += std::sin(heading);
      const int cx = static_cast<int>(std::lround(x));
      const int cy = static_cast<int>(std::lround(y));
      if (cx < 0 || cx >= cfg.grid_width || cy < 0 || cy >= cfg.grid_height)
        break;
      if (cells.back() != std::make_pair(cx, cy)) cells.emplace_back(cx, cy);
    }
  }
  return library;
}

StoredDataset generate_navigation_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ScenarioKind::Navigation)
    throw ConfigError("generate_navigation_dataset needs kind=navigation");

  const TrajectoryLibrary library = build_trajectory_library(cfg);
  const int start_x = 1;
  const int start_y = cfg.grid_height / 2;
  const int goal_x = cfg.grid_width - 2;
  const int goal_y = cfg.grid_height / 2;
  const double window_radius = cfg.trajectory_len + 2.0;

  StoredDataset stored;
  stored.data.library.size = cfg.num_actions;
  stored.objective.kind = ObjectiveKind::BestActionCost;

  std::vector<std::vector<double>> raw_costs(cfg.num_envs);
  double max_finite = 0.0;

  for (int e = 0; e < cfg.num_envs; ++e) {
    std::mt19937_64 terrain_rng = make_rng(cfg.seed, "nav-terrain", e);
    std::mt19937_64 obstacle_rng = make_rng(cfg.seed, "nav-obstacles", e);
    std::uniform_real_distribution<double> terrain_dist(0.5, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GridWorld grid;
    grid.width = cfg.grid_width;
    grid.height = cfg.grid_height;
    grid.start_x = start_x;
    grid.start_y = start_y;
    grid.goal_x = goal_x;
    grid.goal_y = goal_y;
    grid.cell_cost.resize(grid.width * grid.height);
    grid.obstacle.resize(grid.width * grid.height);
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        grid.cell_cost[y * grid.width + x] = terrain_dist(terrain_rng);
        const bool protected_cell = (x == start_x && y == start_y) ||
                                    (x == goal_x && y == goal_y);
        grid.obstacle[y * grid.width + x] =
            !protected_cell && unit(obstacle_rng) < cfg.obstacle_density;
      }
    }

    Environment env;
    env.id = "nav-" + std::to_string(e);

    // Trajectory cost: terrain along the arc plus a straight-line
    // cost-to-go from the endpoint; collisions are clamped later.
    raw_costs[e].resize(cfg.num_actions);
    for (int a = 0; a < cfg.num_actions; ++a) {
      const auto& cells = library.trajectories[a];
      bool collision = false;
      double cost = 0.0;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto [cx, cy] = cells[i];
        if (grid.blocked(cx, cy)) {
          collision = true;
          break;
        }
        cost += grid.cost_at(cx, cy);
      }
      if (collision) {
        raw_costs[e][a] = -1.0;  // clamp marker
      } else {
        const auto [ex, ey] = cells.back();
        cost += std::hypot(static_cast<double>(goal_x - ex),
                           static_cast<double>(goal_y - ey));
        raw_costs[e][a] = cost;
        max_finite = std::max(max_finite, cost);
      }
    }

    // Simulated range scan: distance to the first obstacle along rays that
    // fan over the sector the trajectory library covers, normalized by the
    // window radius (1.0 when the ray stays clear).
    env.features.resize(cfg.feature_len);
    for (int b = 0; b < cfg.feature_len; ++b) {
      const double angle =
          cfg.feature_len == 1
              ? 0.0
              : (static_cast<double>(b) / (cfg.feature_len - 1) - 0.5) * 2.0 *
                    80.0 * kPi / 180.0;
      double range = window_radius;
      for (double r = 0.5; r <= window_radius; r += 0.5) {
        const int cx = static_cast<int>(std::lround(start_x + r * std::cos(angle)));
        const int cy = static_cast<int>(std::lround(start_y + r * std::sin(angle)));
        if (cx < 0 || cx >= grid.width || cy < 0 || cy >= grid.height) break;
        if (grid.blocked(cx, cy)) {
          range = r;
          break;
        }
      }
      env.features[b] = range / window_radius;
    }

    stored.data.environments.push_back(std::move(env));
  }

  const double normalizer = max_finite > 0.0 ? max_finite : 1.0;
  stored.objective.normalizer = normalizer;
  for (int e = 0; e < cfg.num_envs; ++e) {
    auto& env = stored.data.environments[e];
    env.action_costs.resize(cfg.num_actions);
    for (int a = 0; a < cfg.num_actions; ++a)
      env.action_costs[a] =
          raw_costs[e][a] < 0.0 ? normalizer : raw_costs[e][a];
  }
  stored.data.validate();
  return stored;
}

StoredDataset generate_satisficing_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ScenarioKind::SatisficingSeeds)
    throw ConfigError("generate_satisficing_dataset needs kind=satisficing_seeds");

  std::mt19937_64 region_rng = make_rng(cfg.seed, "sat-regions");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> radius_dist(0.15, 0.3);
  // Latent viability disc per action. Actions come in clusters that share a
  // disc exactly: grasps of the same type succeed and fail together, so a
  // useful second attempt must come from a different cluster.
  const int num_clusters = std::max(3, cfg.num_actions / 5);
  std::vector<double> cluster_x(num_clusters), cluster_y(num_clusters),
      cluster_r(num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    cluster_x[c] = 0.1 + 0.8 * unit(region_rng);
    cluster_y[c] = 0.1 + 0.8 * unit(region_rng);
    cluster_r[c] = radius_dist(region_rng);
  }
  std::vector<double> center_x(cfg.num_actions), center_y(cfg.num_actions),
      radius(cfg.num_actions);
  for (int a = 0; a < cfg.num_actions; ++a) {
    const int c = a % num_clusters;
    center_x[a] = cluster_x[c];
    center_y[a] = cluster_y[c];
    radius[a] = cluster_r[c];
  }

  std::mt19937_64 probe_rng = make_rng(cfg.seed, "sat-probes");
  std::vector<double> probe_x(cfg.feature_len), probe_y(cfg.feature_len);
  for (int j = 0; j < cfg.feature_len; ++j) {
    probe_x[j] = unit(probe_rng);
    probe_y[j] = unit(probe_rng);
  }
  const double probe_width = 0.35;

  StoredDataset stored;
  stored.data.library.size = cfg.num_actions;
  stored.objective.kind = ObjectiveKind::SatisficingProbability;
  stored.objective.normalizer = cfg.t_fail;

  for (int e = 0; e < cfg.num_envs; ++e) {
    std::mt19937_64 env_rng = make_rng(cfg.seed, "sat-env", e);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> exec_dist(5.0, 20.0);

    const double u = unit(env_rng);
    const double v = unit(env_rng);

    Environment env;
    env.id = "sat-" + std::to_string(e);
    // Execution time is a property of the grasp type: actions sharing a
    // cluster take the same time when they succeed.
    std::vector<double> cluster_exec(num_clusters);
    for (int c = 0; c < num_clusters; ++c) cluster_exec[c] = exec_dist(env_rng);

    env.action_success.resize(cfg.num_actions);
    env.action_costs.resize(cfg.num_actions);
    for (int a = 0; a < cfg.num_actions; ++a) {
      const bool ok = std::hypot(u - center_x[a], v - center_y[a]) <= radius[a];
      env.action_success[a] = ok;
      env.action_costs[a] = ok ? cluster_exec[a % num_clusters] : cfg.t_fail;
    }

    // Noisy radial-basis observations of the latent context.
    env.features.resize(cfg.feature_len);
    for (int j = 0; j < cfg.feature_len; ++j) {
      const double d2 = (u - probe_x[j]) * (u - probe_x[j]) +
                        (v - probe_y[j]) * (v - probe_y[j]);
      env.features[j] = std::exp(-d2 / (2.0 * probe_width * probe_width)) +
                        cfg.noise * gauss(env_rng);
    }
    stored.data.environments.push_back(std::move(env));
  }
  stored.data.validate();
  return stored;
}

StoredDataset generate_dataset(const ScenarioConfig& cfg) {
  return cfg.kind == ScenarioKind::Navigation
             ? generate_navigation_dataset(cfg)
             : generate_satisficing_dataset(cfg);
}

StoredDataset random_instance(ObjectiveKind kind, int num_envs,
                              int num_actions, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, "random-instance");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  StoredDataset stored;
  stored.data.library.size = num_actions;
  stored.objective.kind = kind;
  stored.objective.normalizer = 1.0;
  for (int e = 0; e < num_envs; ++e) {
    Environment env;
    env.id = "rand-" + std::to_string(e);
    env.features.assign(num_envs, 0.0);  // one-hot environment identity
    env.features[e] = 1.0;
    if (kind == ObjectiveKind::BestActionCost) {
      env.action_costs.resize(num_actions);
      for (double& c : env.action_costs) c = unit(rng);
    } else {
      env.action_success.resize(num_actions);
      for (auto& s : env.action_success) s = unit(rng) < 0.4;
    }
    stored.data.environments.push_back(std::move(env));
  }
  return stored;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          double train_ratio,
                                          std::uint64_t seed) {
  if (train_ratio <= 0.0 || train_ratio >= 1.0)
    throw ConfigError("train_ratio must be in (0,1)");
  const int num = data.num_envs();
  if (num < 2) throw DataError("need at least two environments to split");
  std::vector<int> order(num);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  int num_train = static_cast<int>(std::lround(train_ratio * num));
  num_train = std::clamp(num_train, 1, num - 1);

  Dataset train, test;
  train.library = data.library;
  test.library = data.library;
  for (int i = 0; i < num; ++i) {
    (i < num_train ? train : test)
        .environments.push_back(data.environments[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<Sequence> baseline_order(const Dataset& data,
                                     const ObjectiveSpec& obj,
                                     BaselineKind kind, int num_slots,
                                     std::uint64_t seed, const Dataset* train,
                                     const SequencePredictor* predictor) {
  const int num_actions = data.library.size;
  const int num_envs = data.num_envs();
  std::vector<Sequence> seqs(num_envs);

  switch (kind) {
    case BaselineKind::Random: {
      for (int e = 0; e < num_envs; ++e) {
        Sequence perm(num_actions);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng = make_rng(seed, "baseline-random", e);
        std::shuffle(perm.begin(), perm.end(), rng);
        perm.resize(std::min(num_slots, num_actions));
        seqs[e] = std::move(perm);
      }
      break;
    }
    case BaselineKind::SuccessRateSorted: {
      if (train == nullptr)
        throw ConfigError("success-rate baseline needs a training set");
      std::vector<double> rate(num_actions, 0.0);
      for (const Environment& env : train->environments) {
        if (!env.has_success())
          throw ConfigError("success-rate baseline needs action_success");
        for (int a = 0; a < num_actions; ++a)
          if (env.action_success[a]) rate[a] += 1.0;
      }
      Sequence order(num_actions);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](ActionId a, ActionId b) {
        return rate[a] > rate[b];
      });
      order.resize(std::min(num_slots, num_actions));
      for (auto& s : seqs) s = order;
      break;
    }
    case BaselineKind::AbsoluteBenefitSorted: {
      if (predictor == nullptr || predictor->slots.empty() ||
          predictor->slots.front().kind != SlotKind::BenefitRegressor)
        throw ConfigError(
            "absolute-benefit baseline needs a trained regression predictor");
      const SlotModel& slot1 = predictor->slots.front();
      const ActionFeatureFn base = make_feature_provider(
          predictor->feature_provider, predictor->library_size);
      for (int e = 0; e < num_envs; ++e) {
        const Environment& env = data.environments[e];
        Eigen::MatrixXd rows(num_actions, slot1.schema.input_len);
        for (int a = 0; a < num_actions; ++a)
          rows.row(a) = base(env, a).transpose();
        Eigen::VectorXd predicted = predict_slot_regression(slot1, rows).second;
        // Select greedily with the same tie rule as the slot chain, so that
        // the first pick matches the predictor's first slot exactly.
        Sequence order;
        std::vector<char> used(num_actions, 0);
        const int depth = std::min(num_slots, num_actions);
        for (int n = 0; n < depth; ++n) {
          double best = -std::numeric_limits<double>::infinity();
          for (int a = 0; a < num_actions; ++a)
            if (!used[a]) best = std::max(best, predicted[a]);
          for (int a = 0; a < num_actions; ++a) {
            if (!used[a] && predicted[a] >= best - kPredictionTieTol) {
              order.push_back(a);
              used[a] = 1;
              break;
            }
          }
        }
        seqs[e] = std::move(order);
      }
      break;
    }
    case BaselineKind::StaticGreedy: {
      if (train == nullptr)
        throw ConfigError("static-greedy baseline needs a training set");
      const Sequence seq = greedy_expected(obj, *train, num_slots).sequence;
      for (auto& s : seqs) s = seq;
      break;
    }
  }
  return seqs;
}

MethodCurve evaluate_method(const std::string& name, const ObjectiveSpec& obj,
                            const Dataset& test,
                            const std::vector<Sequence>& seqs, int num_slots,
                            double t_fail) {
  if (seqs.size() != test.environments.size())
    throw SchemaError("expected one sequence per test environment");
  MethodCurve curve;
  curve.name = name;
  const double num = static_cast<double>(test.num_envs());
  const bool satisficing = obj.kind == ObjectiveKind::SatisficingProbability;

  for (int n = 1; n <= num_slots; ++n) {
    int failures = 0;
    double exec_total = 0.0;
    double f_total = 0.0;
    double depth_total = 0.0;
    for (int e = 0; e < test.num_envs(); ++e) {
      const Environment& env = test.environments[e];
      Sequence prefix(seqs[e].begin(),
                      seqs[e].begin() +
                          std::min<std::size_t>(n, seqs[e].size()));
      const double f = eval_sequence(obj, env, prefix);
      f_total += f;
      if (f == 0.0) ++failures;
      if (env.has_costs()) {
        double best = t_fail;
        for (ActionId a : prefix) best = std::min(best, env.action_costs[a]);
        exec_total += best;
      } else {
        exec_total += f > 0.0 ? 0.0 : t_fail;
      }
      if (satisficing) {
        const auto depth = depth_to_success(env, prefix);
        depth_total += depth ? *depth : n + 1;
      }
    }
    curve.failures.push_back(failures);
    curve.mean_exec_time.push_back(exec_total / num);
    curve.mean_f.push_back(f_total / num);
    curve.mean_depth.push_back(satisficing ? depth_total / num : 0.0);
  }
  return curve;
}

const MethodCurve* ComparisonReport::find(const std::string& name) const {
  for (const MethodCurve& c : curves)
    if (c.name == name) return &c;
  return nullptr;
}

ComparisonReport run_comparison(const Dataset& train, const Dataset& test,
                                const ObjectiveSpec& obj,
                                const std::vector<std::string>& methods,
                                int num_slots, double lambda, double t_fail,
                                std::uint64_t seed, bool standardize) {
  ComparisonReport report;
  report.num_train = train.num_envs();
  report.num_test = test.num_envs();
  report.num_slots = num_slots;
  report.objective = to_string(obj.kind);

  auto wants = [&](const std::string& m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };

  SequencePredictor alg1, alg2;
  const bool need_alg2 =
      wants("conseqopt-alg2") || wants("absolute-benefit");
  if (wants("conseqopt-alg1"))
    alg1 = train_conseqopt_classification(train, obj, num_slots, lambda,
                                          standardize);
  if (need_alg2)
    alg2 = train_conseqopt_regression(
        train, obj, num_slots, lambda,
        per_action_affine_features(train.library.size), "per_action_affine",
        standardize);

  for (const std::string& method : methods) {
    std::vector<Sequence> seqs;
    if (method == "random") {
      seqs = baseline_order(test, obj, BaselineKind::Random, num_slots, seed);
    } else if (method == "success-rate") {
      seqs = baseline_order(test, obj, BaselineKind::SuccessRateSorted,
                            num_slots, seed, &train);
    } else if (method == "absolute-benefit") {
      seqs = baseline_order(test, obj, BaselineKind::AbsoluteBenefitSorted,
                            num_slots, seed, nullptr, &alg2);
    } else if (method == "static-greedy") {
      seqs = baseline_order(test, obj, BaselineKind::StaticGreedy, num_slots,
                            seed, &train);
    } else if (method == "conseqopt-alg1") {
      for (const Environment& env : test.environments)
        seqs.push_back(predict_sequence(alg1, env));
    } else if (method == "conseqopt-alg2") {
      for (const Environment& env : test.environments)
        seqs.push_back(predict_sequence(alg2, env));
    } else {
      throw ConfigError("unknown method: " + method);
    }
    report.curves.push_back(
        evaluate_method(method, obj, test, seqs, num_slots, t_fail));
  }
  return report;
}

nlohmann::json comparison_report_to_json(const ComparisonReport& report) {
  nlohmann::json methods = nlohmann::json::array();
  for (const MethodCurve& c : report.curves) {
    methods.push_back({{"name", c.name},
                       {"failures", c.failures},
                       {"mean_exec_time", c.mean_exec_time},
                       {"mean_f", c.mean_f},
                       {"mean_depth", c.mean_depth}});
  }
  return nlohmann::json{{"num_train", report.num_train},
                        {"num_test", report.num_test},
                        {"num_slots", report.num_slots},
                        {"objective", report.objective},
                        {"methods", std::move(methods)}};
}

std::string comparison_report_to_text(const ComparisonReport& report) {
  std::ostringstream out;
  out << "objective: " << report.objective << "  train: " << report.num_train
      << "  test: " << report.num_test << "\n";
  out << std::left << std::setw(20) << "method" << std::right << std::setw(4)
      << "n" << std::setw(10) << "failures" << std::setw(12) << "exec_time"
      << std::setw(10) << "mean_f" << std::setw(10) << "depth" << "\n";
  out << std::string(66, '-') << "\n";
  for (const MethodCurve& c : report.curves) {
    for (int n = 1; n <= report.num_slots; ++n) {
      out << std::left << std::setw(20) << c.name << std::right << std::setw(4)
          << n << std::setw(10) << c.failures[n - 1] << std::setw(12)
          << std::fixed << std::setprecision(3) << c.mean_exec_time[n - 1]
          << std::setw(10) << c.mean_f[n - 1] << std::setw(10)
          << c.mean_depth[n - 1] << "\n";
    }
  }
  return out.str();
}

}  // namespace conseqopt
