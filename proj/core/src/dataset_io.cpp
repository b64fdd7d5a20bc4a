#include "conseqopt/dataset_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace conseqopt {

void save_dataset(const StoredDataset& stored, const std::string& header_path,
                  const std::string& jsonl_path) {
  nlohmann::json header{
      {"num_actions", stored.data.library.size},
      {"feature_len", stored.data.feature_len()},
      {"objective",
       {{"kind", to_string(stored.objective.kind)},
        {"normalizer", stored.objective.normalizer}}}};
  if (!stored.data.library.labels.empty())
    header["action_labels"] = stored.data.library.labels;

  std::ofstream header_out(header_path);
  if (!header_out) throw DataError("cannot write " + header_path);
  header_out << header.dump(2) << "\n";

  std::ofstream jsonl_out(jsonl_path);
  if (!jsonl_out) throw DataError("cannot write " + jsonl_path);
  for (const Environment& env : stored.data.environments) {
    nlohmann::json line{{"id", env.id}, {"features", env.features}};
    if (env.has_costs()) line["action_costs"] = env.action_costs;
    if (env.has_success()) {
      std::vector<bool> flags(env.action_success.begin(),
                              env.action_success.end());
      line["action_success"] = flags;
    }
    jsonl_out << line.dump() << "\n";
  }
}

StoredDataset load_dataset(const std::string& header_path,
                           const std::string& jsonl_path) {
  std::ifstream header_in(header_path);
  if (!header_in) throw DataError("cannot read " + header_path);
  StoredDataset stored;
  try {
    nlohmann::json header = nlohmann::json::parse(header_in);
    stored.data.library.size = header.at("num_actions");
    if (header.contains("action_labels"))
      stored.data.library.labels =
          header.at("action_labels").get<std::vector<std::string>>();
    stored.objective.kind =
        objective_kind_from_string(header.at("objective").at("kind"));
    stored.objective.normalizer =
        header.at("objective").value("normalizer", 1.0);
    const int feature_len = header.at("feature_len");

    std::ifstream jsonl_in(jsonl_path);
    if (!jsonl_in) throw DataError("cannot read " + jsonl_path);
    std::string text;
    int line_no = 0;
    while (std::getline(jsonl_in, text)) {
      ++line_no;
      if (text.empty()) continue;
      nlohmann::json line = nlohmann::json::parse(text);
      Environment env;
      env.id = line.at("id");
      env.features = line.at("features").get<std::vector<double>>();
      if (static_cast<int>(env.features.size()) != feature_len)
        throw SchemaError("line " + std::to_string(line_no) +
                          ": feature length does not match header");
      if (line.contains("action_costs"))
        env.action_costs = line.at("action_costs").get<std::vector<double>>();
      if (line.contains("action_success")) {
        const auto flags = line.at("action_success").get<std::vector<bool>>();
        env.action_success.assign(flags.begin(), flags.end());
      }
      stored.data.environments.push_back(std::move(env));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed dataset: ") + e.what());
  }
  stored.data.validate();
  return stored;
}

}  // namespace conseqopt
