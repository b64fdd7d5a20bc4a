#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conseqopt/rng.hpp"
#include "conseqopt/types.hpp"

namespace conseqopt::cli {

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot digest missing file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0')
      << fnv1a64(bytes);
  return hex.str();
}

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::ostringstream out;
  out << std::put_time(std::gmtime(&t), "%FT%TZ");
  return out.str();
}

/// Records, for every output artifact, the digests of the inputs that
/// produced it. The timestamp is informational; all other fields are
/// reproducible from (command, seed, inputs).
inline void write_manifest(const std::string& path, const std::string& command,
                           std::uint64_t seed,
                           const std::vector<std::string>& input_paths,
                           const std::vector<std::string>& output_paths) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const std::string& p : input_paths) inputs[p] = file_digest(p);
  nlohmann::json outputs = nlohmann::json::object();
  for (const std::string& p : output_paths) outputs[p] = file_digest(p);
  nlohmann::json manifest{{"command", command},
                          {"seed", seed},
                          {"inputs", inputs},
                          {"outputs", outputs},
                          {"timestamp", iso_timestamp()}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << manifest.dump(2) << "\n";
}

}  // namespace conseqopt::cli
