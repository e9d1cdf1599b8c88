#pragma once

#include "dvl/schemas.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace dvl::llm {

struct ClientConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_id;
  // Name of the environment variable holding the API key. Empty disables
  // bearer auth entirely (offline fixture transports need no key).
  std::string api_key_env_var = "OPENAI_API_KEY";
  double timeout_s = 60.0;
  int max_retries = 3;
  int requests_per_minute = 60;
  // Empty disables the on-disk response cache.
  std::filesystem::path cache_dir;
  // Seed for the retry full-jitter stream; affects timing only, never results.
  std::uint64_t retry_jitter_seed = 0;
};

// Injectable time source so retry/backoff and the rate limiter are testable
// with a virtual clock.
class Clock {
public:
  virtual ~Clock() = default;
  virtual std::chrono::milliseconds now() = 0;  // monotonic

  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

std::shared_ptr<Clock> system_clock();

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Transport boundary: one blocking JSON POST. Implementations throw
// TransportError on connection-level failures (DNS, refused, timeout).
class HttpTransport {
public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& bearer_token,
                                 const std::string& body) = 0;
};

// cpp-httplib-backed transport (TLS via OpenSSL).
std::unique_ptr<HttpTransport> make_http_transport(double timeout_s);

// Plain GET returning the body; used for fetching remote images.
std::vector<unsigned char> http_get_bytes(const std::string& url, double timeout_s);

// Sliding-window limiter: at most requests_per_minute acquisitions in any
// 60-second window. Thread-safe; blocks via the injected clock.
class RateLimiter {
public:
  RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock);
  void acquire();

private:
  int rpm_;
  std::shared_ptr<Clock> clock_;
  std::mutex mutex_;
  std::deque<std::chrono::milliseconds> sends_;
};

// Content-addressed cache key: SHA-256 over (model_id, prompt_version, full
// serialized request body, which includes image bytes and the output schema).
std::string cache_key(const schemas::ChatRequest& request);

// One file per key at {dir}/{first 2 hex chars}/{digest}.json holding
// {request_digest, stored_at, response_body}. Corrupt entries degrade to a
// miss. Writes are atomic (temp file + rename).
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);  // empty path disables

  bool enabled() const { return !dir_.empty(); }
  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& response_body) const;

  // Called on corrupt entries with a description; defaults to stderr.
  std::function<void(const std::string&)> on_warning;

private:
  std::filesystem::path dir_;
  std::filesystem::path path_for(const std::string& key) const;
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long total_tokens = 0;
};

struct CompletionResult {
  std::string content;  // assistant message content
  Usage usage;
  bool from_cache = false;
};

// Chat-completions client. Thread-safe: concurrent complete() calls share the
// rate limiter and cache. Cache hits perform no network I/O and skip the
// limiter. Transient failures (HTTP 429/5xx, transport errors) retry with
// exponential backoff (base 1s, factor 2, cap 30s, full jitter) up to
// max_retries; 401/403 raise AuthError immediately; other statuses raise
// NonRetryableStatusError.
class Client {
public:
  explicit Client(ClientConfig config, std::unique_ptr<HttpTransport> transport = nullptr,
                  std::shared_ptr<Clock> clock = nullptr);

  CompletionResult complete(const schemas::ChatRequest& request);

  const ClientConfig& config() const { return config_; }
  ResponseCache& cache() { return cache_; }

private:
  std::string bearer_or_throw() const;

  ClientConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  ResponseCache cache_;
  std::mutex jitter_mutex_;
  std::uint64_t jitter_state_;
};

// Extracts choices[0].message.content and usage from a chat-completions
// response body. Throws TransportError on malformed bodies.
CompletionResult parse_completion_body(const std::string& body, bool from_cache);

}  // namespace dvl::llm
