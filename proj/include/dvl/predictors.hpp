#pragma once

#include "dvl/image_prep.hpp"
#include "dvl/ingestion.hpp"
#include "dvl/llm_client.hpp"
#include "dvl/schemas.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dvl::predictors {

enum class Provenance { ModelCall, CacheHit, Fallback };

std::string_view to_string(Provenance p);             // "model" / "cache" / "fallback"
Provenance provenance_from_string(std::string_view);  // throws dvl::Error

// One prediction of an item's easiness (proportion correct) in [0,1].
// Fallback records carry no analysis and the configured fallback value;
// otherwise prediction equals the analysis's prediction field.
struct PredictionRecord {
  std::string item_id;
  schemas::PredictorKind kind = schemas::PredictorKind::TextOnly;
  double prediction = 0.0;
  Provenance provenance = Provenance::ModelCall;
  std::optional<schemas::ItemAnalysis> analysis;
  std::string prompt_version;
  std::string model_id;
  std::string timestamp;  // ISO-8601 UTC
};

struct BatchConfig {
  int max_concurrency = 4;
  double fallback_value = 0.5;
  image::ImagePolicy image_policy;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

struct Deps {
  llm::Client& client;
  const schemas::PromptLibrary& prompts;
  image::ImageLoader& images;
};

// Runs one item through one pipeline. TextOnly never touches the image
// loader; VisionOnly/Multimodal prepare the image first, and a fallback
// marker short-circuits to a Fallback record. A schema-violating model reply
// gets exactly one corrective re-ask; the second failure raises
// PredictionFailedError. AuthError propagates untouched (nothing item-
// specific about a missing key); all other failures are wrapped into
// PredictionFailedError(item_id, cause).
PredictionRecord predict_item(schemas::PredictorKind kind, const ingestion::ItemContent& item,
                              const Deps& deps, const BatchConfig& config);

struct ItemFailure {
  std::size_t index = 0;
  std::string item_id;
  std::string message;
};

struct BatchResult {
  std::vector<PredictionRecord> records;  // input order (failed items omitted)
  std::vector<ItemFailure> failures;      // sidecar, input order
  llm::Usage usage;                       // summed over model calls
};

// Bounded-parallel batch: at most max_concurrency requests in flight, output
// order equals input order regardless of completion order. Per-item failures
// land in the sidecar without aborting the batch; if every item fails, the
// batch itself throws. Throws EmptyInputError on an empty item list.
BatchResult predict_batch(schemas::PredictorKind kind,
                          const std::vector<ingestion::ItemContent>& items, const Deps& deps,
                          const BatchConfig& config);

// CSV: item_id, kind, prediction, provenance, model_id, prompt_version.
std::string write_predictions_csv(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_predictions_csv(std::istream& in);
std::vector<PredictionRecord> parse_predictions_csv_string(const std::string& text);

// Two-column submission file: item_id, prediction (clamped to [0,1]).
std::string write_submission_csv(const std::vector<PredictionRecord>& records);

}  // namespace dvl::predictors
