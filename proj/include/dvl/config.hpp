#pragma once

#include "dvl/llm_client.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace dvl::config {

// Flat TOML-style "key = value" text: one pair per line, '#' comments,
// values optionally double-quoted. Throws ConfigError on malformed lines.
std::map<std::string, std::string> parse_kv(const std::string& text);

// Everything cmd_predict needs. Unknown keys are errors (typo protection).
// Recognized keys: base_url, model_id, api_key_env, timeout_s, max_retries,
// requests_per_minute, cache_dir, prompts_dir, prompt_version, temperature,
// max_output_tokens. Secrets never appear here; api_key_env only names the
// environment variable that holds the key.
struct PredictSettings {
  llm::ClientConfig client;
  std::string prompts_dir;  // empty: use the compiled-in prompts
  std::string prompt_version = "v1";
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

PredictSettings parse_predict_settings(const std::string& text);
PredictSettings load_predict_settings(const std::filesystem::path& path);

}  // namespace dvl::config
