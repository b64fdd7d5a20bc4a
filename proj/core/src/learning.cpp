#include "conseqopt/learning.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "conseqopt/objective.hpp"

namespace conseqopt {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string("non-finite values in ") + what);
}

ActionId argmin_with_ties(const Eigen::VectorXd& values) {
  const double best = values.minCoeff();
  for (int a = 0; a < values.size(); ++a)
    if (values[a] <= best + kPredictionTieTol) return a;
  return 0;
}

ActionId argmax_with_ties(const Eigen::VectorXd& values) {
  const double best = values.maxCoeff();
  for (int a = 0; a < values.size(); ++a)
    if (values[a] >= best - kPredictionTieTol) return a;
  return 0;
}

}  // namespace

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& features,
                          const Eigen::VectorXd& targets, double lambda) {
  return ridge_fit_multi(features, targets, lambda).col(0);
}

Eigen::MatrixXd ridge_fit_multi(const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& targets, double lambda) {
  if (lambda <= 0.0) throw ConfigError("lambda must be > 0");
  if (features.rows() != targets.rows())
    throw SchemaError("feature/target row mismatch");
  require_finite(features, "features");
  require_finite(targets, "targets");
  Eigen::MatrixXd gram = features.transpose() * features;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(features.transpose() * targets);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& features) {
  Standardizer s;
  const double n = static_cast<double>(features.rows());
  s.mean = features.colwise().mean();
  Eigen::VectorXd var =
      (features.rowwise() - s.mean.transpose()).array().square().colwise().sum() /
      n;
  s.scale.resize(var.size());
  for (int i = 0; i < var.size(); ++i) {
    if (var[i] <= 1e-24) {
      // constant column: leave it untouched so explicit bias features survive
      s.mean[i] = 0.0;
      s.scale[i] = 1.0;
    } else {
      s.scale[i] = 1.0 / std::sqrt(var[i]);
    }
  }
  return s;
}

Standardizer Standardizer::identity(int dim) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(dim);
  s.scale = Eigen::VectorXd::Ones(dim);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size())
    throw SchemaError("standardizer dimension mismatch");
  return (features.rowwise() - mean.transpose()).array().rowwise() *
         scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& row) const {
  if (row.size() != mean.size())
    throw SchemaError("standardizer dimension mismatch");
  return (row - mean).cwiseProduct(scale);
}

Eigen::MatrixXd feature_matrix(const Dataset& data) {
  const int num = data.num_envs();
  const int len = data.feature_len();
  Eigen::MatrixXd features(num, len);
  for (int n = 0; n < num; ++n)
    for (int j = 0; j < len; ++j)
      features(n, j) = data.environments[n].features[j];
  return features;
}

MarginalLossMatrix compute_target_actions(
    const ObjectiveSpec& obj, const Dataset& data,
    const std::vector<Sequence>& prefixes) {
  if (prefixes.size() != data.environments.size())
    throw SchemaError("expected one prefix per environment");
  const int num_actions = data.library.size;
  MarginalLossMatrix out;
  out.values.resize(data.num_envs(), num_actions);
  out.best_action.resize(prefixes.size());
  for (int n = 0; n < data.num_envs(); ++n) {
    const Environment& env = data.environments[n];
    Eigen::VectorXd gains(num_actions);
    for (ActionId a = 0; a < num_actions; ++a)
      gains[a] = marginal_gain(obj, env, prefixes[n], a);
    ActionId best = 0;
    for (ActionId a = 1; a < num_actions; ++a)
      if (gains[a] > gains[best]) best = a;
    out.best_action[n] = best;
    out.values.row(n) = (gains[best] - gains.array()).transpose();
  }
  return out;
}

SlotModel train_slot_classifier(const Eigen::MatrixXd& features,
                                const Eigen::MatrixXd& losses, double lambda,
                                bool standardize) {
  if (features.rows() != losses.rows())
    throw SchemaError("feature/loss row mismatch");
  const int len = static_cast<int>(features.cols());
  SlotModel model;
  model.kind = SlotKind::CostSensitiveClassifier;
  model.standardizer =
      standardize ? Standardizer::fit(features) : Standardizer::identity(len);
  model.schema = {len, len, 0, /*has_bias=*/true};

  Eigen::MatrixXd phi(features.rows(), len + 1);
  phi.leftCols(len) = model.standardizer.apply(features);
  phi.col(len).setOnes();
  // One loss regressor per action, sharing the factorized Gram matrix.
  model.weights = ridge_fit_multi(phi, losses, lambda).transpose();
  return model;
}

std::vector<ActionId> classify(const SlotModel& model,
                               const Eigen::MatrixXd& features) {
  if (model.kind != SlotKind::CostSensitiveClassifier)
    throw SchemaError("classify needs a classifier slot model");
  if (features.cols() != model.schema.input_len)
    throw SchemaError("classify: feature length mismatch");
  const int len = model.schema.input_len;
  Eigen::MatrixXd phi(features.rows(), len + 1);
  phi.leftCols(len) = model.standardizer.apply(features);
  phi.col(len).setOnes();
  const Eigen::MatrixXd predicted = phi * model.weights.transpose();
  std::vector<ActionId> choices(features.rows());
  for (int n = 0; n < features.rows(); ++n)
    choices[n] = argmin_with_ties(predicted.row(n).transpose());
  return choices;
}

SequencePredictor train_conseqopt_classification(const Dataset& data,
                                                 const ObjectiveSpec& obj,
                                                 int num_slots, double lambda,
                                                 bool standardize) {
  if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
  data.validate();
  const Eigen::MatrixXd features = feature_matrix(data);

  SequencePredictor predictor;
  predictor.algorithm = "alg1";
  predictor.objective = obj;
  predictor.library_size = data.library.size;
  predictor.feature_len = data.feature_len();

  std::vector<Sequence> prefixes(data.environments.size());
  for (int slot = 0; slot < num_slots; ++slot) {
    const MarginalLossMatrix losses =
        compute_target_actions(obj, data, prefixes);
    SlotModel model =
        train_slot_classifier(features, losses.values, lambda, standardize);
    const std::vector<ActionId> choices = classify(model, features);
    double slot_loss = 0.0;
    for (int n = 0; n < data.num_envs(); ++n) {
      slot_loss += losses.values(n, choices[n]);
      prefixes[n].push_back(choices[n]);
    }
    predictor.report.slot_loss.push_back(slot_loss / data.num_envs());
    predictor.slots.push_back(std::move(model));
  }
  return predictor;
}

ActionFeatureFn per_action_affine_features(int num_actions) {
  return [num_actions](const Environment& env, ActionId a) {
    const int len = static_cast<int>(env.features.size());
    Eigen::VectorXd row = Eigen::VectorXd::Zero(num_actions * (len + 1));
    const int offset = a * (len + 1);
    for (int j = 0; j < len; ++j) row[offset + j] = env.features[j];
    row[offset + len] = 1.0;
    return row;
  };
}

ActionFeatureFn make_feature_provider(const std::string& name,
                                      int num_actions) {
  if (name == "per_action_affine") return per_action_affine_features(num_actions);
  throw ConfigError("unknown feature provider: " + name);
}

SlotFeatures compute_features_and_benefit(
    const ObjectiveSpec& obj, const Dataset& data,
    const std::vector<Sequence>& prefixes,
    const ActionFeatureFn& base_features) {
  if (prefixes.size() != data.environments.size())
    throw SchemaError("expected one prefix per environment");
  const int num_actions = data.library.size;
  const int num_envs = data.num_envs();
  const int prefix_len =
      prefixes.empty() ? 0 : static_cast<int>(prefixes.front().size());

  const int base_len =
      static_cast<int>(base_features(data.environments.front(), 0).size());
  const int row_len = (prefix_len + 1) * base_len;

  SlotFeatures out;
  out.rows.resize(num_envs * num_actions, row_len);
  out.benefits.resize(num_envs, num_actions);
  for (int n = 0; n < num_envs; ++n) {
    const Environment& env = data.environments[n];
    if (static_cast<int>(prefixes[n].size()) != prefix_len)
      throw SchemaError("ragged prefixes");
    std::vector<Eigen::VectorXd> chosen;
    chosen.reserve(prefix_len);
    for (ActionId c : prefixes[n]) chosen.push_back(base_features(env, c));
    for (ActionId a = 0; a < num_actions; ++a) {
      const Eigen::VectorXd base = base_features(env, a);
      if (base.size() != base_len)
        throw SchemaError("inconsistent base feature length");
      Eigen::VectorXd row(row_len);
      row.head(base_len) = base;
      for (int p = 0; p < prefix_len; ++p)
        row.segment((p + 1) * base_len, base_len) = base - chosen[p];
      out.rows.row(n * num_actions + a) = row.transpose();
      out.benefits(n, a) = marginal_gain(obj, env, prefixes[n], a);
    }
  }
  return out;
}

SlotModel train_slot_regressor(const Eigen::MatrixXd& rows,
                               const Eigen::MatrixXd& benefits, double lambda,
                               const SlotSchema& schema, bool standardize) {
  if (rows.rows() != benefits.rows() * benefits.cols())
    throw SchemaError("row/benefit count mismatch");
  SlotModel model;
  model.kind = SlotKind::BenefitRegressor;
  model.schema = schema;
  model.schema.has_bias = false;
  model.standardizer = standardize
                           ? Standardizer::fit(rows)
                           : Standardizer::identity(static_cast<int>(rows.cols()));
  Eigen::VectorXd targets(rows.rows());
  for (int n = 0; n < benefits.rows(); ++n)
    for (int a = 0; a < benefits.cols(); ++a)
      targets[n * benefits.cols() + a] = benefits(n, a);
  model.weights =
      ridge_fit(model.standardizer.apply(rows), targets, lambda).transpose();
  return model;
}

std::pair<ActionId, Eigen::VectorXd> predict_slot_regression(
    const SlotModel& model, const Eigen::MatrixXd& env_rows) {
  if (model.kind != SlotKind::BenefitRegressor)
    throw SchemaError("predict_slot_regression needs a regressor slot model");
  if (env_rows.cols() != model.schema.input_len)
    throw SchemaError("regressor row length mismatch");
  const Eigen::VectorXd predicted =
      model.standardizer.apply(env_rows) * model.weights.transpose();
  return {argmax_with_ties(predicted), predicted};
}

SequencePredictor train_conseqopt_regression(
    const Dataset& data, const ObjectiveSpec& obj, int num_slots,
    double lambda, const ActionFeatureFn& base_features,
    const std::string& provider_name, bool standardize) {
  if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
  data.validate();
  const int num_actions = data.library.size;

  SequencePredictor predictor;
  predictor.algorithm = "alg2";
  predictor.objective = obj;
  predictor.library_size = num_actions;
  predictor.feature_len = data.feature_len();
  predictor.feature_provider = provider_name;

  std::vector<Sequence> prefixes(data.environments.size());
  for (int slot = 0; slot < num_slots; ++slot) {
    SlotFeatures sf =
        compute_features_and_benefit(obj, data, prefixes, base_features);
    SlotSchema schema;
    schema.base_len = static_cast<int>(sf.rows.cols()) / (slot + 1);
    schema.input_len = static_cast<int>(sf.rows.cols());
    schema.num_diff_blocks = slot;
    SlotModel model =
        train_slot_regressor(sf.rows, sf.benefits, lambda, schema, standardize);

    double mse = 0.0;
    double slot_loss = 0.0;
    for (int n = 0; n < data.num_envs(); ++n) {
      const auto [choice, predicted] = predict_slot_regression(
          model, sf.rows.middleRows(n * num_actions, num_actions));
      mse += (predicted.transpose() - sf.benefits.row(n)).squaredNorm();
      slot_loss += sf.benefits.row(n).maxCoeff() - sf.benefits(n, choice);
      prefixes[n].push_back(choice);
    }
    predictor.report.slot_mse.push_back(mse /
                                        (data.num_envs() * num_actions));
    predictor.report.slot_loss.push_back(slot_loss / data.num_envs());
    predictor.slots.push_back(std::move(model));
  }
  return predictor;
}

Sequence predict_sequence(const SequencePredictor& predictor,
                          const Environment& env) {
  if (predictor.algorithm == "alg2")
    return predict_sequence(
        predictor, env,
        make_feature_provider(predictor.feature_provider,
                              predictor.library_size));
  return predict_sequence(predictor, env, ActionFeatureFn{});
}

Sequence predict_sequence(const SequencePredictor& predictor,
                          const Environment& env,
                          const ActionFeatureFn& base_features) {
  Sequence seq;
  for (const SlotModel& model : predictor.slots) {
    if (model.kind == SlotKind::CostSensitiveClassifier) {
      if (static_cast<int>(env.features.size()) != model.schema.input_len)
        throw SchemaError("environment feature length does not match model");
      Eigen::MatrixXd row(1, model.schema.input_len);
      for (int j = 0; j < model.schema.input_len; ++j)
        row(0, j) = env.features[j];
      seq.push_back(classify(model, row)[0]);
    } else {
      if (!base_features)
        throw ConfigError("regression predictor needs a base feature provider");
      const int num_actions = predictor.library_size;
      const int base_len = model.schema.base_len;
      std::vector<Eigen::VectorXd> chosen;
      for (ActionId c : seq) chosen.push_back(base_features(env, c));
      Eigen::MatrixXd rows(num_actions, model.schema.input_len);
      for (ActionId a = 0; a < num_actions; ++a) {
        const Eigen::VectorXd base = base_features(env, a);
        if (base.size() != base_len)
          throw SchemaError("base feature length does not match model");
        rows.row(a).head(base_len) = base.transpose();
        for (int p = 0; p < model.schema.num_diff_blocks; ++p)
          rows.row(a).segment((p + 1) * base_len, base_len) =
              (base - chosen[p]).transpose();
      }
      seq.push_back(predict_slot_regression(model, rows).first);
    }
  }
  return seq;
}

std::vector<double> reduction_slack(const std::vector<double>& slot_mse,
                                    int num_actions) {
  std::vector<double> slack;
  slack.reserve(slot_mse.size());
  for (double r : slot_mse) {
    if (r < 0.0) throw DataError("squared-loss regret must be non-negative");
    slack.push_back(std::sqrt(2.0 * (num_actions - 1) * r));
  }
  return slack;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(m.size());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.size())
    throw SchemaError("matrix payload size mismatch");
  int k = 0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = data[k++].get<double>();
  return m;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

nlohmann::json predictor_to_json(const SequencePredictor& predictor) {
  nlohmann::json slots = nlohmann::json::array();
  for (const SlotModel& model : predictor.slots) {
    slots.push_back(
        {{"kind", model.kind == SlotKind::CostSensitiveClassifier
                      ? "cost_sensitive_classifier"
                      : "benefit_regressor"},
         {"weights", matrix_to_json(model.weights)},
         {"schema",
          {{"input_len", model.schema.input_len},
           {"base_len", model.schema.base_len},
           {"num_diff_blocks", model.schema.num_diff_blocks},
           {"has_bias", model.schema.has_bias}}},
         {"standardization",
          {{"mean", to_vec(model.standardizer.mean)},
           {"scale", to_vec(model.standardizer.scale)}}}});
  }
  nlohmann::json j{
      {"version", 1},
      {"algorithm", predictor.algorithm},
      {"objective",
       {{"kind", to_string(predictor.objective.kind)},
        {"normalizer", predictor.objective.normalizer}}},
      {"library_size", predictor.library_size},
      {"feature_len", predictor.feature_len},
      {"feature_provider", predictor.feature_provider},
      {"slots", std::move(slots)},
      {"training_report",
       {{"slot_loss", predictor.report.slot_loss},
        {"slot_mse", predictor.report.slot_mse}}}};
  if (!predictor.slots.empty()) {
    j["standardization"] = {
        {"mean", to_vec(predictor.slots.front().standardizer.mean)},
        {"scale", to_vec(predictor.slots.front().standardizer.scale)}};
  }
  return j;
}

SequencePredictor predictor_from_json(const nlohmann::json& j) {
  SequencePredictor predictor;
  try {
    predictor.algorithm = j.at("algorithm").get<std::string>();
    predictor.objective.kind =
        objective_kind_from_string(j.at("objective").at("kind"));
    predictor.objective.normalizer = j.at("objective").at("normalizer");
    predictor.library_size = j.at("library_size");
    predictor.feature_len = j.at("feature_len");
    predictor.feature_provider = j.value("feature_provider", std::string());
    predictor.report.slot_loss =
        j.at("training_report").at("slot_loss").get<std::vector<double>>();
    predictor.report.slot_mse =
        j.at("training_report").at("slot_mse").get<std::vector<double>>();
    for (const auto& js : j.at("slots")) {
      SlotModel model;
      model.kind = js.at("kind") == "cost_sensitive_classifier"
                       ? SlotKind::CostSensitiveClassifier
                       : SlotKind::BenefitRegressor;
      model.weights = matrix_from_json(js.at("weights"));
      const auto& schema = js.at("schema");
      model.schema = {schema.at("input_len"), schema.at("base_len"),
                      schema.at("num_diff_blocks"), schema.at("has_bias")};
      model.standardizer.mean =
          from_vec(js.at("standardization").at("mean").get<std::vector<double>>());
      model.standardizer.scale = from_vec(
          js.at("standardization").at("scale").get<std::vector<double>>());
      predictor.slots.push_back(std::move(model));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
  return predictor;
}

}  // namespace conseqopt
