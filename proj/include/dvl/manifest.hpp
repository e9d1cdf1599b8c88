#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dvl::manifest {

// Written once per predict/evaluate run, next to the primary output. Records
// enough to reproduce the run; never contains secrets (the config snapshot
// names the key's environment variable, not its value).
struct RunManifest {
  std::string command;
  std::string started_at;
  std::string finished_at;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::vector<std::string> outputs;
  std::string prompt_version;
  std::string model_id;
  std::optional<std::uint64_t> seed;

  nlohmann::json to_json() const;
};

// Digest helper for the inputs map.
std::string file_digest(const std::filesystem::path& path);

// Atomic write of manifest.to_json() to path.
void write(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace dvl::manifest
