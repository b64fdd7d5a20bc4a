#pragma once

#include <string>

#include "conseqopt/types.hpp"

namespace conseqopt {

/// On-disk dataset: a JSON header declaring shapes and objective, plus a
/// JSON-Lines file with one environment per line.
struct StoredDataset {
  Dataset data;
  ObjectiveSpec objective;
};

void save_dataset(const StoredDataset& stored, const std::string& header_path,
                  const std::string& jsonl_path);

StoredDataset load_dataset(const std::string& header_path,
                           const std::string& jsonl_path);

}  // namespace conseqopt
