#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "conseqopt/types.hpp"

namespace conseqopt {

/// Tolerance used when a predicted argmin/argmax is turned into an action:
/// all candidates within this margin of the best prediction count as tied and
/// the lowest id wins. Keeps predictions stable when a near-interpolating
/// learner perturbs exactly-tied targets by floating-point dust.
inline constexpr double kPredictionTieTol = 1e-6;

/// Regularized least squares via the normal equations,
/// (X^T X + lambda I) w = X^T y, solved with a single LDLT factorization.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& features,
                          const Eigen::VectorXd& targets, double lambda);

/// Multi-target variant sharing one factorization across columns of Y.
Eigen::MatrixXd ridge_fit_multi(const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& targets, double lambda);

/// Per-column affine map fitted on training data. Zero-variance columns
/// (constant features, explicit bias columns) pass through unchanged.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 / std

  static Standardizer fit(const Eigen::MatrixXd& features);
  static Standardizer identity(int dim);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& row) const;
};

enum class SlotKind { CostSensitiveClassifier, BenefitRegressor };

struct SlotSchema {
  int input_len = 0;        // full row length seen by the weights
  int base_len = 0;         // base feature length before difference blocks
  int num_diff_blocks = 0;  // one per previously chosen action (slot i-1)
  bool has_bias = false;    // classifier appends a constant column itself
};

struct SlotModel {
  SlotKind kind = SlotKind::CostSensitiveClassifier;
  // Classifier: |V| x input_len, one loss-predicting row per action.
  // Regressor: 1 x input_len, shared across per-action feature rows.
  Eigen::MatrixXd weights;
  SlotSchema schema;
  Standardizer standardizer;
};

struct TrainingReport {
  // Mean marginal loss of the chosen action per slot (surrogate for r_i).
  std::vector<double> slot_loss;
  // Mean squared error of the slot regressor (surrogate for r_reg_i);
  // empty for the classifier variant.
  std::vector<double> slot_mse;
};

struct SequencePredictor {
  std::string algorithm;  // "alg1" or "alg2"
  ObjectiveSpec objective;
  int library_size = 0;
  int feature_len = 0;
  std::string feature_provider;  // "" for alg1, provider name for alg2
  std::vector<SlotModel> slots;
  TrainingReport report;
};

/// Per-slot training targets for Algorithm 1: row n holds, for each action,
/// how much worse it is than the best marginal gain available in env n.
struct MarginalLossMatrix {
  Eigen::MatrixXd values;             // |D| x |V|, row minimum exactly 0
  std::vector<ActionId> best_action;  // the 0-loss target per environment
};

MarginalLossMatrix compute_target_actions(const ObjectiveSpec& obj,
                                          const Dataset& data,
                                          const std::vector<Sequence>& prefixes);

/// Stacks the environments' feature vectors into a |D| x L matrix.
Eigen::MatrixXd feature_matrix(const Dataset& data);

SlotModel train_slot_classifier(const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& losses, double lambda,
                                bool standardize = true);

std::vector<ActionId> classify(const SlotModel& model,
                               const Eigen::MatrixXd& features);

SequencePredictor train_conseqopt_classification(const Dataset& data,
                                                 const ObjectiveSpec& obj,
                                                 int num_slots, double lambda,
                                                 bool standardize = true);

/// Base per-action feature rows for Algorithm 2.
using ActionFeatureFn =
    std::function<Eigen::VectorXd(const Environment&, ActionId)>;

/// Default provider: one (L+1)-sized affine block per action, i.e. each
/// action owns its own weight vector over [env features, 1].
ActionFeatureFn per_action_affine_features(int num_actions);

ActionFeatureFn make_feature_provider(const std::string& name,
                                      int num_actions);

struct SlotFeatures {
  Eigen::MatrixXd rows;      // (|D| * |V|) x L', env-major row order
  Eigen::MatrixXd benefits;  // |D| x |V| true marginal gains
};

/// Slot-i feature rows: base features of the candidate followed by one
/// (candidate - chosen) difference block per previously chosen action.
SlotFeatures compute_features_and_benefit(const ObjectiveSpec& obj,
                                          const Dataset& data,
                                          const std::vector<Sequence>& prefixes,
                                          const ActionFeatureFn& base_features);

SlotModel train_slot_regressor(const Eigen::MatrixXd& rows,
                               const Eigen::MatrixXd& benefits, double lambda,
                               const SlotSchema& schema,
                               bool standardize = true);

/// Argmax of predicted benefit over the |V| rows of one environment.
std::pair<ActionId, Eigen::VectorXd> predict_slot_regression(
    const SlotModel& model, const Eigen::MatrixXd& env_rows);

SequencePredictor train_conseqopt_regression(
    const Dataset& data, const ObjectiveSpec& obj, int num_slots,
    double lambda, const ActionFeatureFn& base_features,
    const std::string& provider_name = "custom", bool standardize = true);

/// Runs the slot chain on one environment. Regression predictors resolve
/// their base features from the recorded provider name unless one is given.
Sequence predict_sequence(const SequencePredictor& predictor,
                          const Environment& env);
Sequence predict_sequence(const SequencePredictor& predictor,
                          const Environment& env,
                          const ActionFeatureFn& base_features);

/// Regression-regret plug-in slack per slot: sqrt(2 (|V|-1) r_reg_i).
std::vector<double> reduction_slack(const std::vector<double>& slot_mse,
                                    int num_actions);

nlohmann::json predictor_to_json(const SequencePredictor& predictor);
SequencePredictor predictor_from_json(const nlohmann::json& j);

}  // namespace conseqopt
