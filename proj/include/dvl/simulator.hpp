#pragma once

#include "dvl/ingestion.hpp"
#include "dvl/llm_client.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace dvl::simulator {

// Synthetic item with a latent difficulty parameter b (logits).
struct LatentItem {
  std::string item_id;
  double b = 0.0;
  ingestion::ItemContent content;
};

struct Respondent {
  std::string respondent_id;
  double theta = 0.0;  // ability, logits
};

// Rasch (1PL): P(correct) = 1 / (1 + exp(-(theta - b))).
double rasch_probability(double theta, double b);

// Items with b ~ N(0,1) and ids item_000..., plus minimal content so the
// records flow through ingestion unchanged. Deterministic per seed.
std::vector<LatentItem> generate_latent_items(std::size_t n, std::uint64_t seed);

// Respondents with theta ~ N(0,1), ids resp_00000...
std::vector<Respondent> generate_respondents(std::size_t n, std::uint64_t seed);

// One record per (respondent, item) pair, respondent-major order. Each pair
// draws from its own stream keyed by (seed, respondent index, item index), so
// results are independent of evaluation order and safe to parallelize.
std::vector<ingestion::ResponseRecord> simulate_responses(const std::vector<LatentItem>& items,
                                                          const std::vector<Respondent>& respondents,
                                                          std::uint64_t seed);

// clamp(truth[item_id] + N(0, noise_sd), 0, 1). The noise stream is keyed by
// (seed, item_id), so predictions are reproducible in any call order.
// noise_sd = 0 returns the truth exactly.
double mock_prediction(const std::string& item_id, double truth, double noise_sd,
                       std::uint64_t seed);

// ---- offline transports (also used by the CLI's --offline-fixture) ----

// Replays a fixed response script in call order; repeats the last entry when
// exhausted. Thread-safe; counts calls for instrumentation.
class ScriptedTransport : public llm::HttpTransport {
public:
  explicit ScriptedTransport(std::vector<llm::HttpResponse> script);

  llm::HttpResponse post_json(const std::string& url, const std::string& bearer,
                              const std::string& body) override;

  int calls() const;
  std::vector<std::string> bodies() const;

private:
  std::vector<llm::HttpResponse> script_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
  int calls_ = 0;
  std::vector<std::string> bodies_;
};

// Truth table for synthesizing offline predictions.
struct FixtureSpec {
  std::map<std::string, double> truth;  // item_id -> easiness
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  double default_prediction = 0.5;  // for items missing from truth

  static FixtureSpec from_json(const nlohmann::json& payload);
  static FixtureSpec load(const std::filesystem::path& path);
};

// Synthesizes schema-valid completions offline. The analysis variant comes
// from the request's response_format schema name and the item from its "user"
// field, so replies are deterministic regardless of arrival order.
class FixtureTransport : public llm::HttpTransport {
public:
  explicit FixtureTransport(FixtureSpec spec);

  llm::HttpResponse post_json(const std::string& url, const std::string& bearer,
                              const std::string& body) override;

  int calls() const;

private:
  FixtureSpec spec_;
  mutable std::mutex mutex_;
  int calls_ = 0;
};

// Wraps an analysis payload in a chat-completions response body.
std::string make_completion_body(const nlohmann::json& analysis_payload);

}  // namespace dvl::simulator
