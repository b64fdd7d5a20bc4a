#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "conseqopt/types.hpp"

namespace conseqopt {

/// f(seq) for one environment, always in [0,1] and monotone in extension.
/// BestActionCost: (N_o - min cost over seq) / N_o, empty min = N_o.
/// SatisficingProbability: 1 iff any action in seq succeeds.
double eval_sequence(const ObjectiveSpec& obj, const Environment& env,
                     const Sequence& seq);

/// f(seq + a) - f(seq); non-negative by monotonicity.
double marginal_gain(const ObjectiveSpec& obj, const Environment& env,
                     const Sequence& seq, ActionId a);

/// Mean of eval_sequence across the dataset, one sequence per environment.
double expected_value(const ObjectiveSpec& obj, const Dataset& data,
                      const std::vector<Sequence>& seqs);

/// 1-based position of the first succeeding action, or nullopt.
std::optional<int> depth_to_success(const Environment& env,
                                    const Sequence& seq);

struct SubmodularityWitness {
  std::string property;  // "monotonicity" or "submodularity"
  Sequence s1;
  Sequence s2;
  ActionId action = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct SubmodularityReport {
  int trials = 0;
  int violations = 0;
  std::vector<SubmodularityWitness> witnesses;
};

/// Samples random (S1, S2, a) triples and checks monotonicity and
/// submodularity of an arbitrary sequence function. The callable form exists
/// so tests can feed in deliberately broken objectives.
SubmodularityReport check_monotone_submodular(
    const std::function<double(const Sequence&)>& f, int num_actions,
    int trials, std::uint64_t seed, int max_len = 4);

SubmodularityReport check_monotone_submodular(const ObjectiveSpec& obj,
                                              const Environment& env,
                                              int trials, std::uint64_t seed);

}  // namespace conseqopt
