#include "dvl/manifest.hpp"

#include "dvl/digest.hpp"
#include "dvl/fsio.hpp"

namespace dvl::manifest {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {{"command", command},
                      {"started_at", started_at},
                      {"finished_at", finished_at},
                      {"config", config},
                      {"inputs", input_digests},
                      {"outputs", outputs},
                      {"prompt_version", prompt_version},
                      {"model_id", model_id}};
  if (seed) j["seed"] = *seed;
  return j;
}

std::string file_digest(const std::filesystem::path& path) {
  return sha256_hex(io::read_file(path));
}

void write(const RunManifest& manifest, const std::filesystem::path& path) {
  io::write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace dvl::manifest
