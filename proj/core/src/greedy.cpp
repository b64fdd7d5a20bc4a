#include "conseqopt/greedy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "conseqopt/objective.hpp"

namespace conseqopt {

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kOneMinusInvE = 0.6321205588285577;  // 1 - 1/e

// One greedy step against an arbitrary expected-gain evaluator.
template <typename GainFn>
ActionId argmax_gain(int num_actions, GainFn&& gain, double* best_gain) {
  ActionId best = 0;
  double best_value = gain(0);
  for (ActionId a = 1; a < num_actions; ++a) {
    const double g = gain(a);
    if (g > best_value) {  // strict: ties stay with the lowest id
      best_value = g;
      best = a;
    }
  }
  *best_gain = best_value;
  return best;
}

}  // namespace

nlohmann::json bound_report_to_json(const BoundReport& report) {
  return nlohmann::json{{"kind", report.kind},
                        {"opt_space", report.opt_space},
                        {"achieved", report.achieved},
                        {"opt", report.opt},
                        {"slack_terms", report.slack_terms},
                        {"bound_value", report.bound_value},
                        {"holds", report.holds}};
}

GreedyTrace greedy_per_environment(const ObjectiveSpec& obj,
                                   const Environment& env,
                                   const ActionLibrary& library,
                                   int num_slots) {
  if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
  library.validate();
  GreedyTrace trace;
  for (int slot = 0; slot < num_slots; ++slot) {
    double best_gain = 0.0;
    const ActionId chosen = argmax_gain(
        library.size,
        [&](ActionId a) { return marginal_gain(obj, env, trace.sequence, a); },
        &best_gain);
    trace.sequence.push_back(chosen);
    trace.per_slot_gain.push_back(best_gain);
    trace.per_slot_error.push_back(0.0);
  }
  return trace;
}

GreedyTrace greedy_expected(const ObjectiveSpec& obj, const Dataset& data,
                            int num_slots) {
  if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
  if (data.environments.empty()) throw DataError("empty dataset");
  GreedyTrace trace;
  const double num = static_cast<double>(data.num_envs());
  for (int slot = 0; slot < num_slots; ++slot) {
    double best_gain = 0.0;
    const ActionId chosen = argmax_gain(
        data.library.size,
        [&](ActionId a) {
          double total = 0.0;
          for (const Environment& env : data.environments)
            total += marginal_gain(obj, env, trace.sequence, a);
          return total / num;
        },
        &best_gain);
    trace.sequence.push_back(chosen);
    trace.per_slot_gain.push_back(best_gain);
    trace.per_slot_error.push_back(0.0);
  }
  return trace;
}

BruteForceResult brute_force_optimal(const ObjectiveSpec& obj,
                                     const Dataset& data, int num_slots,
                                     bool per_environment) {
  if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
  const int num_actions = data.library.size;
  const double count = std::pow(static_cast<double>(num_actions),
                                static_cast<double>(num_slots));
  if (count > 1e7)
    throw GuardError("instance too large for brute force: |V|^N = " +
                     std::to_string(count));

  // Lexicographic odometer over ordered sequences with repetition; the first
  // maximizer encountered is the lexicographically smallest.
  auto enumerate = [&](auto&& value_of) {
    Sequence current(num_slots, 0);
    Sequence best = current;
    double best_value = value_of(current);
    while (true) {
      int pos = num_slots - 1;
      while (pos >= 0 && current[pos] == num_actions - 1) {
        current[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++current[pos];
      const double v = value_of(current);
      if (v > best_value) {
        best_value = v;
        best = current;
      }
    }
    return std::make_pair(best, best_value);
  };

  BruteForceResult result;
  if (per_environment) {
    double total = 0.0;
    for (const Environment& env : data.environments) {
      auto [seq, value] = enumerate(
          [&](const Sequence& s) { return eval_sequence(obj, env, s); });
      result.sequences.push_back(std::move(seq));
      total += value;
    }
    result.value = total / static_cast<double>(data.num_envs());
  } else {
    auto [seq, value] = enumerate([&](const Sequence& s) {
      double total = 0.0;
      for (const Environment& env : data.environments)
        total += eval_sequence(obj, env, s);
      return total / static_cast<double>(data.num_envs());
    });
    result.sequences.push_back(std::move(seq));
    result.value = value;
  }
  return result;
}

BoundReport verify_approx_bound(double achieved, double opt,
                            const std::vector<double>& slacks) {
  for (double s : slacks)
    if (s < 0.0) throw DataError("slack terms must be non-negative");
  BoundReport report;
  report.kind = "approx_ratio";
  report.achieved = achieved;
  report.opt = opt;
  report.slack_terms = slacks;
  double slack_sum = 0.0;
  for (double s : slacks) slack_sum += s;
  report.bound_value = kOneMinusInvE * opt - slack_sum;
  report.holds = achieved >= report.bound_value - kBoundTol;
  return report;
}

BoundReport verify_depth_bound(const Dataset& data,
                               const std::vector<Sequence>& seqs,
                               const std::vector<double>& opt_coverage,
                               const std::vector<double>& slacks) {
  if (seqs.size() != data.environments.size())
    throw SchemaError("expected one sequence per environment");
  std::size_t num_slots = 0;
  for (const Sequence& s : seqs) num_slots = std::max(num_slots, s.size());
  if (opt_coverage.size() != num_slots + 1)
    throw SchemaError("opt_coverage must have N+1 entries (n = 0..N)");

  // Truncated expectation: E[depth] = sum_{n=0..N} P(depth > n), with
  // never-satisfied environments counted as depth > N.
  const double num = static_cast<double>(data.num_envs());
  double achieved = 0.0;
  for (std::size_t n = 0; n <= num_slots; ++n) {
    int covered = 0;
    for (std::size_t e = 0; e < seqs.size(); ++e) {
      const auto depth = depth_to_success(data.environments[e], seqs[e]);
      if (depth && static_cast<std::size_t>(*depth) <= n) ++covered;
    }
    achieved += 1.0 - static_cast<double>(covered) / num;
  }

  double opt_integral = 0.0;
  for (double c : opt_coverage) opt_integral += 1.0 - c;
  double slack_sum = 0.0;
  for (double s : slacks) slack_sum += s;

  BoundReport report;
  report.kind = "depth";
  report.achieved = achieved;
  report.opt = opt_integral;
  report.slack_terms = slacks;
  report.bound_value = 4.0 * opt_integral + slack_sum;
  report.holds = achieved <= report.bound_value + kBoundTol;
  return report;
}

}  // namespace conseqopt
