#include "conseqopt/objective.hpp"

#include <algorithm>

#include "conseqopt/rng.hpp"

namespace conseqopt {

namespace {

void check_action(const Environment& env, ActionId a, std::size_t needed) {
  if (a < 0 || static_cast<std::size_t>(a) >= needed)
    throw SchemaError("action id " + std::to_string(a) +
                      " out of range for environment '" + env.id + "'");
}

}  // namespace

double eval_sequence(const ObjectiveSpec& obj, const Environment& env,
                     const Sequence& seq) {
  if (obj.kind == ObjectiveKind::BestActionCost) {
    if (!env.has_costs())
      throw ConfigError("objective best_action_cost needs action_costs ('" +
                        env.id + "')");
    if (obj.normalizer <= 0.0)
      throw ConfigError("normalizer must be positive");
    double best = obj.normalizer;  // empty-min convention, f(<>) = 0
    for (ActionId a : seq) {
      check_action(env, a, env.action_costs.size());
      const double c = env.action_costs[a];
      if (c > obj.normalizer)
        throw DataError("cost " + std::to_string(c) + " exceeds normalizer " +
                        std::to_string(obj.normalizer));
      best = std::min(best, c);
    }
    return (obj.normalizer - best) / obj.normalizer;
  }
  if (!env.has_success())
    throw ConfigError(
        "objective satisficing_probability needs action_success ('" + env.id +
        "')");
  for (ActionId a : seq) {
    check_action(env, a, env.action_success.size());
    if (env.action_success[a]) return 1.0;
  }
  return 0.0;
}

double marginal_gain(const ObjectiveSpec& obj, const Environment& env,
                     const Sequence& seq, ActionId a) {
  Sequence extended = seq;
  extended.push_back(a);
  return eval_sequence(obj, env, extended) - eval_sequence(obj, env, seq);
}

double expected_value(const ObjectiveSpec& obj, const Dataset& data,
                      const std::vector<Sequence>& seqs) {
  if (seqs.size() != data.environments.size())
    throw SchemaError("expected one sequence per environment");
  if (seqs.empty()) throw DataError("empty dataset");
  double total = 0.0;
  for (std::size_t n = 0; n < seqs.size(); ++n)
    total += eval_sequence(obj, data.environments[n], seqs[n]);
  return total / static_cast<double>(seqs.size());
}

std::optional<int> depth_to_success(const Environment& env,
                                    const Sequence& seq) {
  if (!env.has_success())
    throw ConfigError("depth_to_success needs action_success ('" + env.id +
                      "')");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    check_action(env, seq[i], env.action_success.size());
    if (env.action_success[seq[i]]) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

SubmodularityReport check_monotone_submodular(
    const std::function<double(const Sequence&)>& f, int num_actions,
    int trials, std::uint64_t seed, int max_len) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  std::mt19937_64 rng = make_rng(seed, "submodularity-check");
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> act_dist(0, num_actions - 1);
  constexpr double kTol = 1e-12;

  auto random_seq = [&] {
    Sequence s(len_dist(rng));
    for (ActionId& a : s) a = act_dist(rng);
    return s;
  };
  auto concat = [](Sequence a, const Sequence& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };

  SubmodularityReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const Sequence s1 = random_seq();
    const Sequence s2 = random_seq();
    const ActionId a = act_dist(rng);
    const Sequence s12 = concat(s1, s2);

    const double f1 = f(s1);
    const double f12 = f(s12);
    if (f1 > f12 + kTol) {
      ++report.violations;
      report.witnesses.push_back({"monotonicity", s1, s2, a, f1, f12});
    }
    const double gain_long = f(concat(s12, {a})) - f12;
    const double gain_short = f(concat(s1, {a})) - f1;
    if (gain_long > gain_short + kTol) {
      ++report.violations;
      report.witnesses.push_back(
          {"submodularity", s1, s2, a, gain_long, gain_short});
    }
  }
  return report;
}

SubmodularityReport check_monotone_submodular(const ObjectiveSpec& obj,
                                              const Environment& env,
                                              int trials, std::uint64_t seed) {
  const int num_actions = static_cast<int>(
      env.has_costs() ? env.action_costs.size() : env.action_success.size());
  return check_monotone_submodular(
      [&](const Sequence& s) { return eval_sequence(obj, env, s); },
      num_actions, trials, seed);
}

}  // namespace conseqopt
