#include "dvl/config.hpp"

#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"
#include "dvl/ingestion.hpp"

#include <charconv>

namespace dvl::config {

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? text.size() + 1 : end + 1;
    ++line_number;

    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = ingestion::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key = ingestion::trim(line.substr(0, eq));
    std::string value = ingestion::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_number) + ": empty key");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_number) + ": duplicate key " + key);
    }
  }
  return out;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    return io::parse_double(value);
  } catch (const Error&) {
    throw ConfigError("config key " + key + ": not a number: \"" + value + "\"");
  }
}

int to_int(const std::string& key, const std::string& value) {
  int parsed = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key " + key + ": not an integer: \"" + value + "\"");
  }
  return parsed;
}

}  // namespace

PredictSettings parse_predict_settings(const std::string& text) {
  PredictSettings settings;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "base_url") settings.client.base_url = value;
    else if (key == "model_id") settings.client.model_id = value;
    else if (key == "api_key_env") settings.client.api_key_env_var = value;
    else if (key == "timeout_s") settings.client.timeout_s = to_double(key, value);
    else if (key == "max_retries") settings.client.max_retries = to_int(key, value);
    else if (key == "requests_per_minute") settings.client.requests_per_minute = to_int(key, value);
    else if (key == "cache_dir") settings.client.cache_dir = value;
    else if (key == "prompts_dir") settings.prompts_dir = value;
    else if (key == "prompt_version") settings.prompt_version = value;
    else if (key == "temperature") settings.temperature = to_double(key, value);
    else if (key == "max_output_tokens") settings.max_output_tokens = to_int(key, value);
    else throw ConfigError("config: unknown key \"" + key + "\"");
  }
  if (settings.client.model_id.empty()) throw ConfigError("config: model_id is required");
  if (settings.client.max_retries < 0) throw ConfigError("config: max_retries must be >= 0");
  if (settings.client.requests_per_minute < 1) {
    throw ConfigError("config: requests_per_minute must be >= 1");
  }
  if (settings.temperature < 0.0) throw ConfigError("config: temperature must be >= 0");
  if (settings.max_output_tokens < 1) throw ConfigError("config: max_output_tokens must be >= 1");
  return settings;
}

PredictSettings load_predict_settings(const std::filesystem::path& path) {
  try {
    return parse_predict_settings(io::read_file(path));
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace dvl::config
