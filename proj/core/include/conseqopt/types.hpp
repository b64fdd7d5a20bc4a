#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conseqopt {

// Error categories map 1:1 onto CLI exit codes (2/3/4/5).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Index of an action within its library. Valid ids are 0 .. |V|-1.
using ActionId = int;

/// Ordered list of action ids. Duplicates are allowed; under both built-in
/// objectives a repeated action contributes zero marginal gain.
using Sequence = std::vector<ActionId>;

struct ActionLibrary {
  int size = 0;
  std::vector<std::string> labels;  // empty, or exactly `size` entries

  void validate() const {
    if (size < 1) throw ConfigError("action library must have size >= 1");
    if (!labels.empty() && static_cast<int>(labels.size()) != size)
      throw ConfigError("action_labels length does not match num_actions");
  }
};

/// One problem instance: context features plus the per-action evaluations
/// (costs and/or success flags) for a fixed library.
struct Environment {
  std::string id;
  std::vector<double> features;
  std::vector<double> action_costs;  // empty when absent
  std::vector<char> action_success;  // empty when absent; 0/1 flags

  bool has_costs() const { return !action_costs.empty(); }
  bool has_success() const { return !action_success.empty(); }
};

struct Dataset {
  ActionLibrary library;
  std::vector<Environment> environments;

  int num_envs() const { return static_cast<int>(environments.size()); }

  int feature_len() const {
    return environments.empty()
               ? 0
               : static_cast<int>(environments.front().features.size());
  }

  void validate() const {
    library.validate();
    if (environments.empty()) throw DataError("dataset has no environments");
    const std::size_t num_features = environments.front().features.size();
    for (const Environment& env : environments) {
      if (env.features.size() != num_features)
        throw SchemaError("environment '" + env.id +
                          "': inconsistent feature length");
      if (env.has_costs() &&
          static_cast<int>(env.action_costs.size()) != library.size)
        throw SchemaError("environment '" + env.id +
                          "': action_costs length != num_actions");
      if (env.has_success() &&
          static_cast<int>(env.action_success.size()) != library.size)
        throw SchemaError("environment '" + env.id +
                          "': action_success length != num_actions");
      if (!env.has_costs() && !env.has_success())
        throw SchemaError("environment '" + env.id +
                          "': needs action_costs or action_success");
      for (double c : env.action_costs) {
        if (!std::isfinite(c) || c < 0.0)
          throw DataError("environment '" + env.id +
                          "': costs must be finite and >= 0");
      }
      for (double v : env.features) {
        if (!std::isfinite(v))
          throw DataError("environment '" + env.id + "': non-finite feature");
      }
    }
  }
};

enum class ObjectiveKind { BestActionCost, SatisficingProbability };

/// Which monotone submodular objective is maximized. BestActionCost needs a
/// normalizer no smaller than any cost it will see, so values stay in [0,1].
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::BestActionCost;
  double normalizer = 1.0;
};

inline const char* to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::BestActionCost ? "best_action_cost"
                                               : "satisficing_probability";
}

inline ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "best_action_cost") return ObjectiveKind::BestActionCost;
  if (s == "satisficing_probability")
    return ObjectiveKind::SatisficingProbability;
  throw ConfigError("unknown objective kind: " + s);
}

}  // namespace conseqopt
