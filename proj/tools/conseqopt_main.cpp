// Command-line surface: gen / train / eval / compare / verify-bounds.
// Exit codes: 0 success, 1 failed assertion or internal error, 2 config,
// 3 schema, 4 data, 5 brute-force guard.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conseqopt/bench.hpp"
#include "conseqopt/dataset_io.hpp"
#include "conseqopt/greedy.hpp"
#include "conseqopt/learning.hpp"
#include "conseqopt/objective.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace conseqopt;

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

StoredDataset load_dataset_dir(const std::string& dir) {
  return load_dataset((fs::path(dir) / "header.json").string(),
                      (fs::path(dir) / "dataset.jsonl").string());
}

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
  ScenarioConfig cfg = scenario_config_from_json(read_json_file(config_path));
  if (seed_override) cfg.seed = *seed_override;
  const StoredDataset stored = generate_dataset(cfg);

  fs::create_directories(out_dir);
  const std::string header = (fs::path(out_dir) / "header.json").string();
  const std::string jsonl = (fs::path(out_dir) / "dataset.jsonl").string();
  save_dataset(stored, header, jsonl);
  cli::write_manifest((fs::path(out_dir) / "manifest.json").string(), "gen",
                      cfg.seed, {config_path}, {header, jsonl});
  std::cout << "wrote " << stored.data.num_envs() << " environments to "
            << jsonl << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& algorithm,
              int num_slots, double lambda, bool standardize,
              const std::string& out_path) {
  if (num_slots < 1) throw ConfigError("--slots must be >= 1");
  if (lambda <= 0.0) throw ConfigError("--lambda must be > 0");
  const StoredDataset stored = load_dataset_dir(data_dir);

  SequencePredictor predictor;
  if (algorithm == "alg1") {
    predictor = train_conseqopt_classification(stored.data, stored.objective,
                                               num_slots, lambda, standardize);
  } else if (algorithm == "alg2") {
    predictor = train_conseqopt_regression(
        stored.data, stored.objective, num_slots, lambda,
        per_action_affine_features(stored.data.library.size),
        "per_action_affine", standardize);
  } else {
    throw ConfigError("--algorithm must be alg1 or alg2");
  }

  if (!out_path.empty() && fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  write_text_file(out_path, predictor_to_json(predictor).dump(2) + "\n");

  nlohmann::json report{{"algorithm", predictor.algorithm},
                        {"slot_loss", predictor.report.slot_loss},
                        {"slot_mse", predictor.report.slot_mse}};
  if (!predictor.report.slot_mse.empty())
    report["reduction_slack"] = reduction_slack(predictor.report.slot_mse,
                                                predictor.library_size);
  const std::string report_path = out_path + ".report.json";
  write_text_file(report_path, report.dump(2) + "\n");
  cli::write_manifest(out_path + ".manifest.json", "train", 0,
                      {(fs::path(data_dir) / "header.json").string(),
                       (fs::path(data_dir) / "dataset.jsonl").string()},
                      {out_path, report_path});
  std::cout << "trained " << algorithm << " with " << num_slots
            << " slots -> " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir,
             const std::string& out_path, const std::string& format) {
  const SequencePredictor predictor =
      predictor_from_json(read_json_file(model_path));
  const StoredDataset stored = load_dataset_dir(data_dir);
  if (predictor.library_size != stored.data.library.size)
    throw SchemaError("model library_size does not match dataset");
  if (predictor.feature_len != stored.data.feature_len())
    throw SchemaError("model feature_len does not match dataset");

  std::vector<Sequence> seqs;
  for (const Environment& env : stored.data.environments)
    seqs.push_back(predict_sequence(predictor, env));

  ComparisonReport report;
  report.num_test = stored.data.num_envs();
  report.num_slots = static_cast<int>(predictor.slots.size());
  report.objective = to_string(stored.objective.kind);
  report.curves.push_back(evaluate_method("model", stored.objective,
                                          stored.data, seqs, report.num_slots,
                                          stored.objective.normalizer));

  const nlohmann::json j = comparison_report_to_json(report);
  const std::string text = format == "text" ? comparison_report_to_text(report)
                                            : j.dump(2) + "\n";
  if (!out_path.empty())
    write_text_file(out_path, text);
  else
    std::cout << text;
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                std::vector<std::string> methods, bool assert_trend,
                const std::string& format,
                std::optional<std::uint64_t> seed_override) {
  ScenarioConfig cfg = scenario_config_from_json(read_json_file(config_path));
  if (seed_override) cfg.seed = *seed_override;
  if (methods.empty())
    methods = {"random",        "success-rate",   "absolute-benefit",
               "static-greedy", "conseqopt-alg1", "conseqopt-alg2"};
  if (cfg.kind == ScenarioKind::Navigation) {
    // success-rate needs action_success, which navigation data lacks
    std::erase(methods, std::string("success-rate"));
  }

  const StoredDataset stored = generate_dataset(cfg);
  const auto [train, test] =
      split_dataset(stored.data, cfg.train_ratio, cfg.seed);
  const ComparisonReport report =
      run_comparison(train, test, stored.objective, methods, cfg.num_slots,
                     cfg.lambda, cfg.t_fail, cfg.seed, cfg.standardize);

  fs::create_directories(out_dir);
  const std::string json_path = (fs::path(out_dir) / "report.json").string();
  const std::string text_path = (fs::path(out_dir) / "report.txt").string();
  write_text_file(json_path, comparison_report_to_json(report).dump(2) + "\n");
  write_text_file(text_path, comparison_report_to_text(report));
  cli::write_manifest((fs::path(out_dir) / "manifest.json").string(),
                      "compare", cfg.seed, {config_path},
                      {json_path, text_path});
  if (format == "text")
    std::cout << comparison_report_to_text(report);
  else
    std::cout << comparison_report_to_json(report).dump(2) << "\n";

  if (assert_trend) {
    const MethodCurve* ours = report.find("conseqopt-alg2");
    if (ours == nullptr) ours = report.find("conseqopt-alg1");
    const MethodCurve* random = report.find("random");
    if (ours == nullptr || random == nullptr)
      throw ConfigError("--assert-trend needs a conseqopt method and random");
    const int last = report.num_slots - 1;
    if (ours->failures[last] >= random->failures[last]) {
      std::cerr << "trend assertion failed: conseqopt failures "
                << ours->failures[last] << " !< random failures "
                << random->failures[last] << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_verify_bounds(const std::string& config_path,
                      const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override) {
  const nlohmann::json j = read_json_file(config_path);
  const int num_instances = j.value("num_instances", 100);
  const int num_actions = j.value("num_actions", 5);
  const int num_slots = j.value("num_slots", 3);
  const int num_envs = j.value("num_envs", 10);
  const double lambda = j.value("lambda", 1e-8);
  const std::string objective = j.value("objective", std::string("both"));
  std::uint64_t seed = j.value("seed", 42ULL);
  if (seed_override) seed = *seed_override;
  if (num_instances < 1) throw ConfigError("num_instances must be >= 1");

  std::vector<ObjectiveKind> kinds;
  if (objective == "both" || objective == "best_action_cost")
    kinds.push_back(ObjectiveKind::BestActionCost);
  if (objective == "both" || objective == "satisficing_probability")
    kinds.push_back(ObjectiveKind::SatisficingProbability);
  if (kinds.empty()) throw ConfigError("unknown objective: " + objective);

  nlohmann::json reports = nlohmann::json::array();
  bool all_greedy_hold = true;
  for (int i = 0; i < num_instances; ++i) {
    for (ObjectiveKind kind : kinds) {
      const StoredDataset inst = random_instance(
          kind, num_envs, num_actions, stream_seed(seed, "bound-instance", i));
      const ObjectiveSpec& obj = inst.objective;

      // Clairvoyant greedy against the per-environment brute-force optimum.
      const BruteForceResult opt_env =
          brute_force_optimal(obj, inst.data, num_slots, true);
      std::vector<Sequence> greedy_seqs;
      double greedy_value = 0.0;
      for (const Environment& env : inst.data.environments) {
        GreedyTrace trace =
            greedy_per_environment(obj, env, inst.data.library, num_slots);
        greedy_value += eval_sequence(obj, env, trace.sequence);
        greedy_seqs.push_back(std::move(trace.sequence));
      }
      greedy_value /= inst.data.num_envs();
      BoundReport greedy_report =
          verify_approx_bound(greedy_value, opt_env.value, {});
      greedy_report.opt_space = "per_env_brute_force";
      all_greedy_hold = all_greedy_hold && greedy_report.holds;
      reports.push_back(bound_report_to_json(greedy_report));

      // Learned predictors against the static optimum with empirical slacks.
      const BruteForceResult opt_static =
          brute_force_optimal(obj, inst.data, num_slots, false);
      for (const std::string& alg : {"alg1", "alg2"}) {
        SequencePredictor predictor;
        if (alg == "alg1") {
          predictor = train_conseqopt_classification(inst.data, obj, num_slots,
                                                     lambda, false);
        } else {
          predictor = train_conseqopt_regression(
              inst.data, obj, num_slots, lambda,
              per_action_affine_features(num_actions), "per_action_affine",
              false);
        }
        std::vector<Sequence> seqs;
        for (const Environment& env : inst.data.environments)
          seqs.push_back(predict_sequence(predictor, env));
        BoundReport learned = verify_approx_bound(
            expected_value(obj, inst.data, seqs), opt_static.value,
            predictor.report.slot_loss);
        learned.opt_space = "static_brute_force/" + alg;
        reports.push_back(bound_report_to_json(learned));
      }
    }
  }

  fs::create_directories(out_dir);
  const std::string bounds_path = (fs::path(out_dir) / "bounds.json").string();
  write_text_file(bounds_path, reports.dump(2) + "\n");
  cli::write_manifest((fs::path(out_dir) / "manifest.json").string(),
                      "verify-bounds", seed, {config_path}, {bounds_path});
  std::cout << reports.size() << " bound reports -> " << bounds_path << "\n";
  if (!all_greedy_hold) {
    std::cerr << "clairvoyant greedy bound failed on at least one instance\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual submodular sequence optimization"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_dir, model_path;
  std::string algorithm = "alg2";
  std::string format = "json";
  std::string methods_csv;
  int num_slots = 3;
  double lambda = 1e-6;
  bool no_standardize = false;
  bool assert_trend = false;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("gen", "generate a dataset from a scenario config");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path)->required();
  gen->add_option("--seed", seed);

  auto* train = app.add_subcommand("train", "train a sequence predictor");
  train->add_option("--data", data_dir)->required();
  train->add_option("--algorithm", algorithm)->check(CLI::IsMember({"alg1", "alg2"}));
  train->add_option("--slots", num_slots);
  train->add_option("--lambda", lambda);
  train->add_flag("--no-standardize", no_standardize);
  train->add_option("--out", out_path)->required();

  auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", data_dir)->required();
  eval->add_option("--out", out_path);
  eval->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  auto* compare = app.add_subcommand("compare", "run the method comparison harness");
  compare->add_option("--config", config_path)->required();
  compare->add_option("--out", out_path)->required();
  compare->add_option("--methods", methods_csv, "comma-separated method list");
  compare->add_flag("--assert-trend", assert_trend);
  compare->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));
  compare->add_option("--seed", seed);

  auto* verify = app.add_subcommand("verify-bounds", "check greedy/regret bounds on random instances");
  verify->add_option("--config", config_path)->required();
  verify->add_option("--out", out_path)->required();
  verify->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_path, seed);
    if (train->parsed())
      return cmd_train(data_dir, algorithm, num_slots, lambda, !no_standardize,
                       out_path);
    if (eval->parsed()) return cmd_eval(model_path, data_dir, out_path, format);
    if (compare->parsed()) {
      std::vector<std::string> methods;
      std::stringstream ss(methods_csv);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) methods.push_back(item);
      return cmd_compare(config_path, out_path, methods, assert_trend, format,
                         seed);
    }
    if (verify->parsed()) return cmd_verify_bounds(config_path, out_path, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const GuardError& e) {
    std::cerr << "guard error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
