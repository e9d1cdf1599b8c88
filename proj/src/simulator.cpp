#include "dvl/simulator.hpp"

#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"
#include "dvl/rng.hpp"
#include "dvl/schemas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dvl::simulator {

using nlohmann::json;

double rasch_probability(double theta, double b) { return 1.0 / (1.0 + std::exp(-(theta - b))); }

namespace {

std::string padded_id(const char* prefix, std::size_t index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, index);
  return buf;
}

}  // namespace

std::vector<LatentItem> generate_latent_items(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(stream_key(seed, 0xa11ce));
  std::vector<LatentItem> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LatentItem item;
    item.item_id = padded_id("item_", i, 3);
    item.b = rng.next_gaussian();
    item.content.item_id = item.item_id;
    item.content.image_url = item.item_id + ".png";
    item.content.question_text = "Synthetic chart question for " + item.item_id;
    item.content.possible_responses = {"Option A", "Option B", "Option C", "Option D"};
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<Respondent> generate_respondents(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(stream_key(seed, 0xb0b));
  std::vector<Respondent> respondents;
  respondents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    respondents.push_back({padded_id("resp_", i, 5), rng.next_gaussian()});
  }
  return respondents;
}

std::vector<ingestion::ResponseRecord> simulate_responses(const std::vector<LatentItem>& items,
                                                          const std::vector<Respondent>& respondents,
                                                          std::uint64_t seed) {
  if (items.empty()) throw EmptyInputError("simulate_responses: no items");
  if (respondents.empty()) throw EmptyInputError("simulate_responses: no respondents");

  std::vector<ingestion::ResponseRecord> records;
  records.reserve(items.size() * respondents.size());
  for (std::size_t r = 0; r < respondents.size(); ++r) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      SplitMix64 rng(stream_key(seed, r, i));
      const double p = rasch_probability(respondents[r].theta, items[i].b);
      const bool correct = rng.next_double() < p;

      ingestion::ResponseRecord rec;
      rec.item_id = items[i].content.item_id;
      rec.image_url = items[i].content.image_url;
      rec.question_text = items[i].content.question_text;
      rec.possible_responses = items[i].content.possible_responses;
      rec.incorrect_response = !correct;
      rec.participant_id = respondents[r].respondent_id;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

double mock_prediction(const std::string& item_id, double truth, double noise_sd,
                       std::uint64_t seed) {
  if (noise_sd == 0.0) return std::clamp(truth, 0.0, 1.0);
  SplitMix64 rng(stream_key(seed, fnv1a64(item_id)));
  return std::clamp(truth + noise_sd * rng.next_gaussian(), 0.0, 1.0);
}

// ---- scripted transport ----

ScriptedTransport::ScriptedTransport(std::vector<llm::HttpResponse> script)
    : script_(std::move(script)) {
  if (script_.empty()) throw Error("ScriptedTransport: empty script");
}

llm::HttpResponse ScriptedTransport::post_json(const std::string&, const std::string&,
                                               const std::string& body) {
  std::lock_guard lock(mutex_);
  ++calls_;
  bodies_.push_back(body);
  const llm::HttpResponse& response = script_[std::min(next_, script_.size() - 1)];
  ++next_;
  return response;
}

int ScriptedTransport::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::vector<std::string> ScriptedTransport::bodies() const {
  std::lock_guard lock(mutex_);
  return bodies_;
}

// ---- fixture transport ----

FixtureSpec FixtureSpec::from_json(const json& payload) {
  FixtureSpec spec;
  if (!payload.is_object()) throw ConfigError("fixture: expected a JSON object");
  if (const auto it = payload.find("truth"); it != payload.end()) {
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number()) throw ConfigError("fixture: truth values must be numbers");
      const double v = value.get<double>();
      if (v < 0.0 || v > 1.0) throw ConfigError("fixture: truth for " + key + " outside [0,1]");
      spec.truth[key] = v;
    }
  }
  spec.noise_sd = payload.value("noise_sd", 0.0);
  if (spec.noise_sd < 0.0) throw ConfigError("fixture: noise_sd must be >= 0");
  spec.seed = payload.value("seed", std::uint64_t{0});
  spec.default_prediction = payload.value("default_prediction", 0.5);
  if (spec.default_prediction < 0.0 || spec.default_prediction > 1.0) {
    throw ConfigError("fixture: default_prediction outside [0,1]");
  }
  return spec;
}

FixtureSpec FixtureSpec::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(io::read_file(path)));
  } catch (const json::exception& e) {
    throw ConfigError("fixture " + path.string() + ": invalid JSON: " + e.what());
  }
}

std::string make_completion_body(const json& analysis_payload) {
  const json body = {
      {"id", "cmpl-fixture"},
      {"object", "chat.completion"},
      {"model", "offline-fixture"},
      {"choices",
       json::array({json{{"index", 0},
                         {"finish_reason", "stop"},
                         {"message", {{"role", "assistant"}, {"content", analysis_payload.dump()}}}}})},
      {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}, {"total_tokens", 0}}}};
  return body.dump();
}

FixtureTransport::FixtureTransport(FixtureSpec spec) : spec_(std::move(spec)) {}

llm::HttpResponse FixtureTransport::post_json(const std::string&, const std::string&,
                                              const std::string& body) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }

  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception& e) {
    return {400, std::string("fixture: request body is not JSON: ") + e.what()};
  }

  const std::string item_id = request.value("user", "");
  double truth = spec_.default_prediction;
  if (const auto it = spec_.truth.find(item_id); it != spec_.truth.end()) truth = it->second;
  const double prediction = mock_prediction(item_id, truth, spec_.noise_sd, spec_.seed);

  std::string schema_name;
  if (request.contains("response_format")) {
    schema_name = request["response_format"].value("/json_schema/name"_json_pointer, "");
  }

  json analysis;
  if (schema_name == "text_analysis") {
    schemas::TextAnalysis a;
    a.cognitive_task_type = schemas::CognitiveTaskType::RetrieveValue;
    a.question_clarity = 4;
    a.information_integration_level = 2;
    a.option_count = 4;
    a.correct_answer_text = "Option A";
    a.distractor_plausibility = 3;
    a.format_consistency = 5;
    a.prediction = prediction;
    analysis = schemas::to_json(a);
  } else if (schema_name == "vision_analysis") {
    schemas::VisionAnalysis a;
    a.chart_type = "bar";
    a.axis_clarity = 4;
    a.encoding_clarity = 4;
    a.readability = 4;
    a.clutter_level = 2;
    a.data_series_count = 1;
    a.annotations_present = false;
    a.visual_complexity = 2;
    a.prediction = prediction;
    analysis = schemas::to_json(a);
  } else if (schema_name == "multimodal_analysis") {
    schemas::MultimodalAnalysis a;
    a.visual_summary = "A simple synthetic chart.";
    a.textual_demands = "Read one value from the chart.";
    a.option_quality = "Four distinct options.";
    a.interaction_notes = "Question and chart align directly.";
    a.prediction = prediction;
    analysis = schemas::to_json(a);
  } else {
    return {400, "fixture: unknown or missing response_format schema name"};
  }

  return {200, make_completion_body(analysis)};
}

int FixtureTransport::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace dvl::simulator
