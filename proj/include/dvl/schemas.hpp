#pragma once

#include "dvl/image_prep.hpp"
#include "dvl/ingestion.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dvl::schemas {

// The three prediction pipelines.
enum class PredictorKind { TextOnly, VisionOnly, Multimodal };

std::string_view to_string(PredictorKind kind);                // "text" / "vision" / "multimodal"
PredictorKind kind_from_string(std::string_view name);         // throws dvl::Error

enum class CognitiveTaskType {
  RetrieveValue,
  FindExtremum,
  CompareValues,
  Aggregate,
  FindCorrelation,
  MakePrediction,
  Other,
};

std::string_view to_string(CognitiveTaskType type);
CognitiveTaskType cognitive_task_from_string(std::string_view name);  // throws dvl::Error

// In every analysis variant, `prediction` is the estimated easiness
// (proportion correct) in [0,1]. Ordinal fields use a 1-5 scale.

struct TextAnalysis {
  CognitiveTaskType cognitive_task_type = CognitiveTaskType::Other;
  int question_clarity = 3;
  int information_integration_level = 3;
  int option_count = 0;
  std::optional<std::string> correct_answer_text;
  int distractor_plausibility = 3;
  int format_consistency = 3;
  double prediction = 0.5;

  friend bool operator==(const TextAnalysis&, const TextAnalysis&) = default;
};

struct VisionAnalysis {
  std::string chart_type;
  int axis_clarity = 3;
  int encoding_clarity = 3;
  int readability = 3;
  int clutter_level = 3;
  int data_series_count = 0;
  bool annotations_present = false;
  int visual_complexity = 3;
  double prediction = 0.5;

  friend bool operator==(const VisionAnalysis&, const VisionAnalysis&) = default;
};

struct MultimodalAnalysis {
  std::string visual_summary;
  std::string textual_demands;
  std::string option_quality;
  std::string interaction_notes;
  double prediction = 0.5;

  friend bool operator==(const MultimodalAnalysis&, const MultimodalAnalysis&) = default;
};

using ItemAnalysis = std::variant<TextAnalysis, VisionAnalysis, MultimodalAnalysis>;

PredictorKind kind_of(const ItemAnalysis& analysis);
double prediction_of(const ItemAnalysis& analysis);

nlohmann::json to_json(const TextAnalysis&);
nlohmann::json to_json(const VisionAnalysis&);
nlohmann::json to_json(const MultimodalAnalysis&);
nlohmann::json to_json(const ItemAnalysis&);

// Parses and validates model output against the variant for `kind`. Strict:
// every declared field is required, unknown fields are rejected, so a payload
// for one variant never parses as another. Throws SchemaViolationError
// (missing/extra field, wrong type, bad JSON) or OutOfRangeError (prediction
// outside [0,1], ordinal outside its range); both are retryable.
ItemAnalysis parse_structured_response(std::string_view raw, PredictorKind kind);

// Plain JSON schema for the variant (strict: additionalProperties false,
// all fields required).
nlohmann::json analysis_schema(PredictorKind kind);

// The chat-completions response_format payload wrapping analysis_schema.
nlohmann::json response_format(PredictorKind kind);

std::string_view schema_name(PredictorKind kind);  // e.g. "text_analysis"

// ---- prompts ----

// One pipeline's prompt: static system text plus a user-message template with
// {{question_text}} and {{options}} placeholders. An empty user template
// means the user message carries no text part (vision-only).
struct PromptSet {
  std::string system_text;
  std::string user_template;
};

class PromptLibrary {
public:
  // Compiled-in v1 prompts; prompts/ in the repository carries the same text.
  static PromptLibrary builtin();

  // Loads {text,vision,multimodal}.<version>.txt from dir. Each file is the
  // system text, then a line "---user---", then the user template.
  static PromptLibrary load_dir(const std::filesystem::path& dir, const std::string& version);

  const PromptSet& for_kind(PredictorKind kind) const;
  const std::string& version() const { return version_; }

private:
  std::string version_;
  PromptSet text_;
  PromptSet vision_;
  PromptSet multimodal_;
};

// Numbered, newline-separated option list ("1. ...\n2. ...").
std::string format_options(const std::vector<std::string>& options);

// Renders a user template, substituting {{question_text}} and {{options}}.
std::string render_template(std::string_view tmpl, const ingestion::ItemContent& item);

// ---- requests ----

struct TextPart {
  std::string text;
  friend bool operator==(const TextPart&, const TextPart&) = default;
};

struct ImagePartData {
  std::string media_type;
  std::vector<unsigned char> bytes;
  friend bool operator==(const ImagePartData&, const ImagePartData&) = default;
};

using MessagePart = std::variant<TextPart, ImagePartData>;

struct RequestConfig {
  std::string model_id;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

struct ChatRequest {
  std::string model_id;
  std::string system_prompt;
  std::vector<MessagePart> user_parts;
  nlohmann::json output_schema;  // response_format payload
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string prompt_version;
  // Serialized as the standard "user" attribution field; predictors set it to
  // the item id so offline fixture transports can resolve items.
  std::string user_tag;

  // Canonical chat-completions body (nlohmann keeps object keys sorted, so
  // identical requests serialize byte-identically).
  nlohmann::json to_body() const;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

// Deterministic request construction. TextOnly embeds the question text and
// numbered options and carries no image; VisionOnly attaches exactly one
// image and no question text; Multimodal carries both. Throws
// MissingImageError when kind needs an image and none is given.
ChatRequest build_request(PredictorKind kind, const ingestion::ItemContent& item,
                          const std::optional<image::EncodedImage>& img,
                          const RequestConfig& config, const PromptLibrary& prompts);

// The re-ask request: same content plus an appended correction instruction
// naming the validation failure.
ChatRequest with_correction(const ChatRequest& request, const std::string& error_message);

}  // namespace dvl::schemas
