#include "dvl/llm_client.hpp"

#include "dvl/digest.hpp"
#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"
#include "dvl/rng.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace dvl::llm {

using nlohmann::json;

namespace {

class SystemClock : public Clock {
public:
  std::chrono::milliseconds now() override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  }
  void sleep_for(std::chrono::milliseconds d) override { std::this_thread::sleep_for(d); }
};

// Splits "https://host:port/base/path" into client target and path prefix.
struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // leading '/'
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("malformed URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
public:
  explicit HttplibTransport(double timeout_s) : timeout_s_(timeout_s) {}

  HttpResponse post_json(const std::string& url, const std::string& bearer,
                         const std::string& body) override {
    const SplitUrl parts = split_url(url);
    httplib::Client client(parts.origin);
    configure(client);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
    auto result = client.Post(parts.path, headers, body, "application/json");
    if (!result) {
      throw TransportError("POST " + url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

private:
  void configure(httplib::Client& client) const {
    const auto seconds = static_cast<time_t>(timeout_s_);
    const auto usec = static_cast<time_t>((timeout_s_ - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, usec);
    client.set_read_timeout(seconds, usec);
    client.set_write_timeout(seconds, usec);
    client.set_follow_location(true);
  }

  double timeout_s_;
};

}  // namespace

std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

std::unique_ptr<HttpTransport> make_http_transport(double timeout_s) {
  return std::make_unique<HttplibTransport>(timeout_s);
}

std::vector<unsigned char> http_get_bytes(const std::string& url, double timeout_s) {
  const SplitUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto seconds = static_cast<time_t>(timeout_s);
  client.set_connection_timeout(seconds, 0);
  client.set_read_timeout(seconds, 0);
  client.set_follow_location(true);
  auto result = client.Get(parts.path);
  if (!result) {
    throw TransportError("GET " + url + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw IoError("GET " + url + " returned status " + std::to_string(result->status));
  }
  return std::vector<unsigned char>(result->body.begin(), result->body.end());
}

// ---- rate limiter ----

RateLimiter::RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock)
    : rpm_(requests_per_minute), clock_(std::move(clock)) {
  if (rpm_ < 1) throw Error("requests_per_minute must be >= 1");
}

void RateLimiter::acquire() {
  constexpr auto window = std::chrono::milliseconds(60'000);
  for (;;) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(mutex_);
      const auto now = clock_->now();
      while (!sends_.empty() && now - sends_.front() >= window) sends_.pop_front();
      if (sends_.size() < static_cast<std::size_t>(rpm_)) {
        sends_.push_back(now);
        return;
      }
      wait = sends_.front() + window - now;
    }
    clock_->sleep_for(std::max(wait, std::chrono::milliseconds(1)));
  }
}

// ---- cache ----

std::string cache_key(const schemas::ChatRequest& request) {
  // nlohmann sorts object keys, so dump() is canonical for a given request.
  const json material = {{"model_id", request.model_id},
                         {"prompt_version", request.prompt_version},
                         {"body", request.to_body()}};
  return sha256_hex(material.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  on_warning = [](const std::string& message) { std::cerr << "warning: " << message << "\n"; };
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const json entry = json::parse(io::read_file(path));
    if (entry.at("request_digest").get<std::string>() != key) {
      on_warning("cache entry " + path.string() + " has a mismatched digest; treating as a miss");
      return std::nullopt;
    }
    return entry.at("response_body").get<std::string>();
  } catch (const std::exception& e) {
    on_warning("corrupt cache entry " + path.string() + " (" + e.what() + "); treating as a miss");
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const std::string& response_body) const {
  if (!enabled()) return;
  const json entry = {{"request_digest", key},
                      {"stored_at", io::iso8601_utc_now()},
                      {"response_body", response_body}};
  io::write_file_atomic(path_for(key), entry.dump(2));
}

// ---- client ----

CompletionResult parse_completion_body(const std::string& body, bool from_cache) {
  try {
    const json payload = json::parse(body);
    const json& message = payload.at("choices").at(0).at("message");
    CompletionResult result;
    result.content = message.at("content").get<std::string>();
    if (const auto usage = payload.find("usage"); usage != payload.end() && usage->is_object()) {
      result.usage.prompt_tokens = usage->value("prompt_tokens", 0L);
      result.usage.completion_tokens = usage->value("completion_tokens", 0L);
      result.usage.total_tokens = usage->value("total_tokens", 0L);
    }
    result.from_cache = from_cache;
    return result;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
}

Client::Client(ClientConfig config, std::unique_ptr<HttpTransport> transport,
               std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_http_transport(config_.timeout_s)),
      clock_(clock ? std::move(clock) : system_clock()),
      limiter_(config_.requests_per_minute, clock_),
      cache_(config_.cache_dir),
      jitter_state_(config_.retry_jitter_seed) {}

std::string Client::bearer_or_throw() const {
  if (config_.api_key_env_var.empty()) return {};
  const char* key = std::getenv(config_.api_key_env_var.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("environment variable " + config_.api_key_env_var +
                    " is not set; cannot authenticate");
  }
  return key;
}

CompletionResult Client::complete(const schemas::ChatRequest& request) {
  const std::string key = cache_key(request);
  if (auto hit = cache_.lookup(key)) {
    return parse_completion_body(*hit, /*from_cache=*/true);
  }

  // Resolved before any network attempt.
  const std::string bearer = bearer_or_throw();

  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const std::string body = request.to_body().dump();

  int attempt = 0;
  for (;;) {
    limiter_.acquire();
    int status = 0;
    std::string failure;
    try {
      const HttpResponse response = transport_->post_json(url, bearer, body);
      status = response.status;
      if (status == 200) {
        // Parse before storing so corrupt bodies are retried, never cached.
        CompletionResult result = parse_completion_body(response.body, /*from_cache=*/false);
        cache_.store(key, response.body);
        return result;
      }
      if (status == 401 || status == 403) {
        throw AuthError("authentication rejected with HTTP " + std::to_string(status));
      }
      if (status != 429 && status < 500) {
        throw NonRetryableStatusError(status, response.body);
      }
      failure = "HTTP " + std::to_string(status);
    } catch (const TransportError& e) {
      status = 0;
      failure = e.what();
    }

    if (attempt >= config_.max_retries) {
      if (status == 429) {
        throw RateLimitExhaustedError("rate limited after " +
                                      std::to_string(config_.max_retries) + " retries");
      }
      throw TransportError("request failed after " + std::to_string(config_.max_retries) +
                           " retries: " + failure);
    }

    // Full jitter: uniform in [0, min(cap, base * 2^attempt)).
    constexpr double base_ms = 1000.0;
    constexpr double cap_ms = 30'000.0;
    const double ceiling = std::min(cap_ms, base_ms * static_cast<double>(1u << std::min(attempt, 20)));
    double u;
    {
      std::lock_guard lock(jitter_mutex_);
      SplitMix64 rng(jitter_state_);
      u = rng.next_double();
      jitter_state_ = rng.next_u64();
    }
    clock_->sleep_for(std::chrono::milliseconds(static_cast<long>(u * ceiling)));
    ++attempt;
  }
}

}  // namespace dvl::llm
