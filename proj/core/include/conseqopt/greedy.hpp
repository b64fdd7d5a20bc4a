#pragma once

#include <string>
#include <vector>

#include "conseqopt/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace conseqopt {

/// Result of a greedy construction. Clairvoyant greedy always has zero
/// per-slot error; the error slots exist for traces built from learned
/// predictors, where the incurred gap to the true argmax is known.
struct GreedyTrace {
  Sequence sequence;
  std::vector<double> per_slot_gain;
  std::vector<double> per_slot_error;
};

struct BruteForceResult {
  // One sequence per environment when per_environment, otherwise a single
  // shared static sequence.
  std::vector<Sequence> sequences;
  double value = 0.0;  // mean f over the dataset
};

struct BoundReport {
  std::string kind;       // "approx_ratio" or "depth"
  std::string opt_space;  // e.g. "static_brute_force", "per_env_brute_force"
  double achieved = 0.0;
  double opt = 0.0;
  std::vector<double> slack_terms;
  double bound_value = 0.0;
  bool holds = false;
};

nlohmann::json bound_report_to_json(const BoundReport& report);

/// Full-information greedy on a single environment: each slot takes the
/// action with maximal marginal gain, ties to the lowest id.
GreedyTrace greedy_per_environment(const ObjectiveSpec& obj,
                                   const Environment& env,
                                   const ActionLibrary& library,
                                   int num_slots);

/// Greedy on the dataset-mean objective; yields the static context-free
/// baseline sequence.
GreedyTrace greedy_expected(const ObjectiveSpec& obj, const Dataset& data,
                            int num_slots);

/// Exhaustive search over all |V|^N ordered sequences. Guarded against
/// instances with more than 10^7 candidates.
BruteForceResult brute_force_optimal(const ObjectiveSpec& obj,
                                     const Dataset& data, int num_slots,
                                     bool per_environment);

/// Checks achieved >= (1 - 1/e) * opt - sum(slacks) up to 1e-9.
BoundReport verify_approx_bound(double achieved, double opt,
                            const std::vector<double>& slacks);

/// Satisficing-depth bound: truncated expected depth of the given sequences
/// must not exceed 4 * sum_n (1 - opt_coverage[n]) + sum(slacks), where
/// opt_coverage[n] is the fraction of environments the optimal length-n
/// prefix already satisfies, for n = 0..N.
BoundReport verify_depth_bound(const Dataset& data,
                               const std::vector<Sequence>& seqs,
                               const std::vector<double>& opt_coverage,
                               const std::vector<double>& slacks = {});

}  // namespace conseqopt
