#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conseqopt/dataset_io.hpp"
#include "conseqopt/learning.hpp"
#include "conseqopt/types.hpp"

namespace conseqopt {

struct GridWorld {
  int width = 0;
  int height = 0;
  std::vector<double> cell_cost;  // row-major, height * width
  std::vector<char> obstacle;     // row-major occupancy
  int start_x = 0, start_y = 0;
  int goal_x = 0, goal_y = 0;

  double cost_at(int x, int y) const { return cell_cost[y * width + x]; }
  bool blocked(int x, int y) const { return obstacle[y * width + x] != 0; }
};

/// Fixed arc rasterizations fanning out from the start cell; shared by every
/// environment of a navigation scenario.
struct TrajectoryLibrary {
  std::vector<std::vector<std::pair<int, int>>> trajectories;
};

enum class ScenarioKind { Navigation, SatisficingSeeds };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::SatisficingSeeds;
  int num_envs = 500;
  int num_actions = 30;
  int num_slots = 3;
  int feature_len = 17;
  double noise = 0.3;
  double obstacle_density = 0.15;
  std::uint64_t seed = 42;
  double t_fail = 40.0;
  double train_ratio = 0.6;
  double lambda = 1e-6;
  bool standardize = true;
  // navigation only
  int grid_width = 24;
  int grid_height = 24;
  int trajectory_len = 10;

  void validate() const;
};

ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
nlohmann::json scenario_config_to_json(const ScenarioConfig& cfg);

TrajectoryLibrary build_trajectory_library(const ScenarioConfig& cfg);

StoredDataset generate_navigation_dataset(const ScenarioConfig& cfg);
StoredDataset generate_satisficing_dataset(const ScenarioConfig& cfg);
StoredDataset generate_dataset(const ScenarioConfig& cfg);

/// Small random instance with one-hot environment-id features; used by the
/// bound-verification harness where interpolating learners are wanted.
StoredDataset random_instance(ObjectiveKind kind, int num_envs,
                              int num_actions, std::uint64_t seed);

/// Seeded shuffle split by environment index: first train_ratio of the
/// permuted order becomes the training set.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          double train_ratio,
                                          std::uint64_t seed);

enum class BaselineKind {
  Random,
  SuccessRateSorted,
  AbsoluteBenefitSorted,
  StaticGreedy
};

/// Per-environment orderings for the comparison baselines. Strategies that
/// need training-time information take it through the extra arguments.
std::vector<Sequence> baseline_order(const Dataset& data,
                                     const ObjectiveSpec& obj,
                                     BaselineKind kind, int num_slots,
                                     std::uint64_t seed = 0,
                                     const Dataset* train = nullptr,
                                     const SequencePredictor* predictor = nullptr);

struct MethodCurve {
  std::string name;
  // Indexed by prefix length n = 1..N.
  std::vector<int> failures;
  std::vector<double> mean_exec_time;
  std::vector<double> mean_f;
  std::vector<double> mean_depth;  // not-found counted as n+1
};

struct ComparisonReport {
  int num_train = 0;
  int num_test = 0;
  int num_slots = 0;
  std::string objective;
  std::vector<MethodCurve> curves;

  const MethodCurve* find(const std::string& name) const;
};

nlohmann::json comparison_report_to_json(const ComparisonReport& report);
std::string comparison_report_to_text(const ComparisonReport& report);

/// Evaluates one method's per-environment sequences on a test set.
MethodCurve evaluate_method(const std::string& name, const ObjectiveSpec& obj,
                            const Dataset& test,
                            const std::vector<Sequence>& seqs, int num_slots,
                            double t_fail);

/// End-to-end harness: train both ConSeqOpt variants on the training split
/// and score every requested method on the test split.
ComparisonReport run_comparison(const Dataset& train, const Dataset& test,
                                const ObjectiveSpec& obj,
                                const std::vector<std::string>& methods,
                                int num_slots, double lambda, double t_fail,
                                std::uint64_t seed, bool standardize = true);

}  // namespace conseqopt
