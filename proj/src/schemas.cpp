#include "dvl/schemas.hpp"

#include "dvl/digest.hpp"
#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dvl::schemas {

using nlohmann::json;

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::TextOnly: return "text";
    case PredictorKind::VisionOnly: return "vision";
    case PredictorKind::Multimodal: return "multimodal";
  }
  return "text";
}

PredictorKind kind_from_string(std::string_view name) {
  if (name == "text") return PredictorKind::TextOnly;
  if (name == "vision") return PredictorKind::VisionOnly;
  if (name == "multimodal") return PredictorKind::Multimodal;
  throw Error("unknown predictor kind: \"" + std::string(name) + "\"");
}

namespace {

constexpr std::array<std::string_view, 7> kTaskNames = {
    "retrieve_value", "find_extremum",  "compare_values", "aggregate",
    "find_correlation", "make_prediction", "other"};

}  // namespace

std::string_view to_string(CognitiveTaskType type) {
  return kTaskNames[static_cast<std::size_t>(type)];
}

CognitiveTaskType cognitive_task_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == name) return static_cast<CognitiveTaskType>(i);
  }
  throw Error("unknown cognitive task type: \"" + std::string(name) + "\"");
}

PredictorKind kind_of(const ItemAnalysis& analysis) {
  return std::visit(
      [](const auto& a) -> PredictorKind {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, TextAnalysis>) return PredictorKind::TextOnly;
        if constexpr (std::is_same_v<T, VisionAnalysis>) return PredictorKind::VisionOnly;
        if constexpr (std::is_same_v<T, MultimodalAnalysis>) return PredictorKind::Multimodal;
      },
      analysis);
}

double prediction_of(const ItemAnalysis& analysis) {
  return std::visit([](const auto& a) { return a.prediction; }, analysis);
}

json to_json(const TextAnalysis& a) {
  return {{"cognitive_task_type", to_string(a.cognitive_task_type)},
          {"question_clarity", a.question_clarity},
          {"information_integration_level", a.information_integration_level},
          {"option_count", a.option_count},
          {"correct_answer_text", a.correct_answer_text ? json(*a.correct_answer_text) : json()},
          {"distractor_plausibility", a.distractor_plausibility},
          {"format_consistency", a.format_consistency},
          {"prediction", a.prediction}};
}

json to_json(const VisionAnalysis& a) {
  return {{"chart_type", a.chart_type},
          {"axis_clarity", a.axis_clarity},
          {"encoding_clarity", a.encoding_clarity},
          {"readability", a.readability},
          {"clutter_level", a.clutter_level},
          {"data_series_count", a.data_series_count},
          {"annotations_present", a.annotations_present},
          {"visual_complexity", a.visual_complexity},
          {"prediction", a.prediction}};
}

json to_json(const MultimodalAnalysis& a) {
  return {{"visual_summary", a.visual_summary},
          {"textual_demands", a.textual_demands},
          {"option_quality", a.option_quality},
          {"interaction_notes", a.interaction_notes},
          {"prediction", a.prediction}};
}

json to_json(const ItemAnalysis& analysis) {
  return std::visit([](const auto& a) { return to_json(a); }, analysis);
}

namespace {

// Field accessors shared by the three variant parsers. Each enforces
// presence and type (SchemaViolationError) before range checks.

const json& require_field(const json& payload, const char* field) {
  const auto it = payload.find(field);
  if (it == payload.end()) throw SchemaViolationError(field, "missing");
  return *it;
}

std::string require_string(const json& payload, const char* field) {
  const json& v = require_field(payload, field);
  if (!v.is_string()) throw SchemaViolationError(field, "expected a string");
  return v.get<std::string>();
}

bool require_bool(const json& payload, const char* field) {
  const json& v = require_field(payload, field);
  if (!v.is_boolean()) throw SchemaViolationError(field, "expected a boolean");
  return v.get<bool>();
}

int require_int(const json& payload, const char* field) {
  const json& v = require_field(payload, field);
  if (!v.is_number_integer()) throw SchemaViolationError(field, "expected an integer");
  return v.get<int>();
}

int require_ordinal(const json& payload, const char* field) {
  const int value = require_int(payload, field);
  if (value < 1 || value > 5) throw OutOfRangeError(field, value);
  return value;
}

int require_count(const json& payload, const char* field) {
  const int value = require_int(payload, field);
  if (value < 0) throw OutOfRangeError(field, value);
  return value;
}

double require_prediction(const json& payload) {
  const json& v = require_field(payload, "prediction");
  if (!v.is_number()) throw SchemaViolationError("prediction", "expected a number");
  const double value = v.get<double>();
  if (!(value >= 0.0 && value <= 1.0)) throw OutOfRangeError("prediction", value);
  return value;
}

void reject_unknown_fields(const json& payload, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : payload.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaViolationError(key, "unknown field");
    }
  }
}

TextAnalysis parse_text(const json& payload) {
  reject_unknown_fields(payload,
                        {"cognitive_task_type", "question_clarity", "information_integration_level",
                         "option_count", "correct_answer_text", "distractor_plausibility",
                         "format_consistency", "prediction"});
  TextAnalysis a;
  const std::string task = require_string(payload, "cognitive_task_type");
  try {
    a.cognitive_task_type = cognitive_task_from_string(task);
  } catch (const Error&) {
    throw SchemaViolationError("cognitive_task_type", "not one of the declared values: " + task);
  }
  a.question_clarity = require_ordinal(payload, "question_clarity");
  a.information_integration_level = require_ordinal(payload, "information_integration_level");
  a.option_count = require_count(payload, "option_count");
  const json& answer = require_field(payload, "correct_answer_text");
  if (answer.is_string()) {
    a.correct_answer_text = answer.get<std::string>();
  } else if (!answer.is_null()) {
    throw SchemaViolationError("correct_answer_text", "expected a string or null");
  }
  a.distractor_plausibility = require_ordinal(payload, "distractor_plausibility");
  a.format_consistency = require_ordinal(payload, "format_consistency");
  a.prediction = require_prediction(payload);
  return a;
}

VisionAnalysis parse_vision(const json& payload) {
  reject_unknown_fields(payload, {"chart_type", "axis_clarity", "encoding_clarity", "readability",
                                  "clutter_level", "data_series_count", "annotations_present",
                                  "visual_complexity", "prediction"});
  VisionAnalysis a;
  a.chart_type = require_string(payload, "chart_type");
  a.axis_clarity = require_ordinal(payload, "axis_clarity");
  a.encoding_clarity = require_ordinal(payload, "encoding_clarity");
  a.readability = require_ordinal(payload, "readability");
  a.clutter_level = require_ordinal(payload, "clutter_level");
  a.data_series_count = require_count(payload, "data_series_count");
  a.annotations_present = require_bool(payload, "annotations_present");
  a.visual_complexity = require_ordinal(payload, "visual_complexity");
  a.prediction = require_prediction(payload);
  return a;
}

MultimodalAnalysis parse_multimodal(const json& payload) {
  reject_unknown_fields(payload, {"visual_summary", "textual_demands", "option_quality",
                                  "interaction_notes", "prediction"});
  MultimodalAnalysis a;
  a.visual_summary = require_string(payload, "visual_summary");
  a.textual_demands = require_string(payload, "textual_demands");
  a.option_quality = require_string(payload, "option_quality");
  a.interaction_notes = require_string(payload, "interaction_notes");
  a.prediction = require_prediction(payload);
  return a;
}

}  // namespace

ItemAnalysis parse_structured_response(std::string_view raw, PredictorKind kind) {
  json payload;
  try {
    payload = json::parse(raw);
  } catch (const json::exception& e) {
    throw SchemaViolationError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!payload.is_object()) throw SchemaViolationError("<document>", "expected a JSON object");

  switch (kind) {
    case PredictorKind::TextOnly: return parse_text(payload);
    case PredictorKind::VisionOnly: return parse_vision(payload);
    case PredictorKind::Multimodal: return parse_multimodal(payload);
  }
  throw Error("unreachable predictor kind");
}

namespace {

json ordinal_schema(const char* description) {
  return {{"type", "integer"}, {"minimum", 1}, {"maximum", 5}, {"description", description}};
}

json count_schema(const char* description) {
  return {{"type", "integer"}, {"minimum", 0}, {"description", description}};
}

json prediction_schema() {
  return {{"type", "number"},
          {"minimum", 0.0},
          {"maximum", 1.0},
          {"description", "Estimated proportion of respondents answering correctly."}};
}

json strict_object(json properties) {
  json required = json::array();
  for (const auto& [key, _] : properties.items()) required.push_back(key);
  return {{"type", "object"},
          {"properties", std::move(properties)},
          {"required", std::move(required)},
          {"additionalProperties", false}};
}

}  // namespace

std::string_view schema_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::TextOnly: return "text_analysis";
    case PredictorKind::VisionOnly: return "vision_analysis";
    case PredictorKind::Multimodal: return "multimodal_analysis";
  }
  return "text_analysis";
}

json analysis_schema(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::TextOnly: {
      json task_names = json::array();
      for (const auto name : kTaskNames) task_names.push_back(name);
      return strict_object(
          {{"cognitive_task_type",
            {{"type", "string"}, {"enum", std::move(task_names)},
             {"description", "The kind of cognitive task the question demands."}}},
           {"question_clarity", ordinal_schema("How clearly the question is phrased (1-5).")},
           {"information_integration_level",
            ordinal_schema("How much information must be integrated to answer (1-5).")},
           {"option_count", count_schema("Number of answer options.")},
           {"correct_answer_text",
            {{"type", json::array({"string", "null"})},
             {"description", "The likely correct option, or null if unclear."}}},
           {"distractor_plausibility",
            ordinal_schema("How plausible the incorrect options are (1-5).")},
           {"format_consistency",
            ordinal_schema("How consistent the option formats are (1-5).")},
           {"prediction", prediction_schema()}});
    }
    case PredictorKind::VisionOnly:
      return strict_object(
          {{"chart_type", {{"type", "string"}, {"description", "e.g. bar, line, scatter, pie."}}},
           {"axis_clarity", ordinal_schema("How clearly the axes are labeled (1-5).")},
           {"encoding_clarity", ordinal_schema("How clearly data is encoded (1-5).")},
           {"readability", ordinal_schema("Overall readability (1-5).")},
           {"clutter_level", ordinal_schema("Visual clutter, 1 = clean, 5 = cluttered.")},
           {"data_series_count", count_schema("Number of data series shown.")},
           {"annotations_present",
            {{"type", "boolean"}, {"description", "Whether explanatory annotations appear."}}},
           {"visual_complexity", ordinal_schema("Overall visual complexity (1-5).")},
           {"prediction", prediction_schema()}});
    case PredictorKind::Multimodal:
      return strict_object(
          {{"visual_summary",
            {{"type", "string"}, {"description", "Summary of the chart's visual elements."}}},
           {"textual_demands",
            {{"type", "string"}, {"description", "What the question text demands of the reader."}}},
           {"option_quality",
            {{"type", "string"}, {"description", "Assessment of the answer options."}}},
           {"interaction_notes",
            {{"type", "string"},
             {"description", "How the question interacts with the visualization."}}},
           {"prediction", prediction_schema()}});
  }
  throw Error("unreachable predictor kind");
}

json response_format(PredictorKind kind) {
  return {{"type", "json_schema"},
          {"json_schema",
           {{"name", schema_name(kind)}, {"strict", true}, {"schema", analysis_schema(kind)}}}};
}

// ---- prompts ----

namespace {

constexpr std::string_view kTextSystemV1 =
    "You are a psychometric analyst estimating how hard a data-visualization quiz question is "
    "for U.S. adults.\n"
    "You will receive the question text and its answer options. You cannot see the chart "
    "image.\n"
    "Analyze the textual features of the item: the cognitive task type, question clarity, the "
    "level of information integration required, the number of options, the likely correct "
    "answer text, distractor plausibility, and format consistency.\n"
    "Then estimate the proportion of respondents who would answer correctly.\n"
    "Respond only with JSON matching the provided schema. Set \"prediction\" to the estimated "
    "proportion correct, a number between 0 and 1.\n";

constexpr std::string_view kTextUserV1 =
    "Question: {{question_text}}\n"
    "\n"
    "Answer options:\n"
    "{{options}}\n";

constexpr std::string_view kVisionSystemV1 =
    "You are a psychometric analyst estimating how hard a data-visualization quiz item is for "
    "U.S. adults.\n"
    "You will receive only the chart image. The question text is intentionally withheld.\n"
    "Analyze the visual features of the chart: chart type, axis clarity, data encoding "
    "clarity, readability, clutter level, number of data series, presence of annotations, and "
    "overall visual complexity.\n"
    "Then estimate the proportion of respondents who would answer a typical question about "
    "this chart correctly.\n"
    "Respond only with JSON matching the provided schema. Set \"prediction\" to the estimated "
    "proportion correct, a number between 0 and 1.\n";

constexpr std::string_view kMultimodalSystemV1 =
    "You are a psychometric analyst estimating how hard a data-visualization quiz item is for "
    "U.S. adults.\n"
    "You will receive the chart image together with the question text and its answer "
    "options.\n"
    "Perform a comprehensive analysis: summarize the visual elements, assess the textual "
    "demands, judge the quality of the answer options, and consider how the question "
    "interacts with the chart.\n"
    "Then estimate the proportion of respondents who would answer correctly.\n"
    "Respond only with JSON matching the provided schema. Set \"prediction\" to the estimated "
    "proportion correct, a number between 0 and 1.\n";

PromptSet split_prompt_file(const std::string& contents, const std::string& path) {
  const std::string marker = "---user---";
  const auto pos = contents.find(marker);
  if (pos == std::string::npos) {
    throw ConfigError("prompt file " + path + " lacks the \"" + marker + "\" separator line");
  }
  PromptSet set;
  set.system_text = contents.substr(0, pos);
  std::size_t after = pos + marker.size();
  if (after < contents.size() && contents[after] == '\n') ++after;
  set.user_template = contents.substr(after);
  // A whitespace-only user section means "no text part".
  if (ingestion::trim(set.user_template).empty()) set.user_template.clear();
  return set;
}

}  // namespace

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  lib.version_ = "v1";
  lib.text_ = {std::string(kTextSystemV1), std::string(kTextUserV1)};
  lib.vision_ = {std::string(kVisionSystemV1), std::string()};
  lib.multimodal_ = {std::string(kMultimodalSystemV1), std::string(kTextUserV1)};
  return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir, const std::string& version) {
  PromptLibrary lib;
  lib.version_ = version;
  const auto load = [&](const char* kind) {
    const std::filesystem::path path = dir / (std::string(kind) + "." + version + ".txt");
    return split_prompt_file(io::read_file(path), path.string());
  };
  lib.text_ = load("text");
  lib.vision_ = load("vision");
  lib.multimodal_ = load("multimodal");
  return lib;
}

const PromptSet& PromptLibrary::for_kind(PredictorKind kind) const {
  switch (kind) {
    case PredictorKind::TextOnly: return text_;
    case PredictorKind::VisionOnly: return vision_;
    case PredictorKind::Multimodal: return multimodal_;
  }
  return text_;
}

std::string format_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += std::to_string(i + 1);
    out += ". ";
    out += options[i];
    if (i + 1 < options.size()) out.push_back('\n');
  }
  return out;
}

namespace {

void replace_all(std::string& text, std::string_view needle, std::string_view replacement) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
}

}  // namespace

std::string render_template(std::string_view tmpl, const ingestion::ItemContent& item) {
  std::string out(tmpl);
  replace_all(out, "{{question_text}}", item.question_text);
  replace_all(out, "{{options}}", format_options(item.possible_responses));
  return out;
}

// ---- requests ----

json ChatRequest::to_body() const {
  json content = json::array();
  for (const auto& part : user_parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", text->text}});
    } else {
      const auto& img = std::get<ImagePartData>(part);
      content.push_back(
          {{"type", "image_url"},
           {"image_url",
            {{"url", "data:" + img.media_type + ";base64," +
                         base64_encode(std::span<const unsigned char>(img.bytes))}}}});
    }
  }
  json body = {{"model", model_id},
               {"messages",
                json::array({json{{"role", "system"}, {"content", system_prompt}},
                             json{{"role", "user"}, {"content", std::move(content)}}})},
               {"temperature", temperature},
               {"max_tokens", max_output_tokens},
               {"response_format", output_schema}};
  if (!user_tag.empty()) body["user"] = user_tag;
  return body;
}

ChatRequest build_request(PredictorKind kind, const ingestion::ItemContent& item,
                          const std::optional<image::EncodedImage>& img,
                          const RequestConfig& config, const PromptLibrary& prompts) {
  if (kind != PredictorKind::TextOnly && !img) {
    throw MissingImageError(std::string(to_string(kind)));
  }

  const PromptSet& prompt = prompts.for_kind(kind);
  ChatRequest request;
  request.model_id = config.model_id;
  request.system_prompt = prompt.system_text;
  request.temperature = config.temperature;
  request.max_output_tokens = config.max_output_tokens;
  request.prompt_version = prompts.version();
  request.output_schema = response_format(kind);

  if (kind != PredictorKind::VisionOnly && !prompt.user_template.empty()) {
    request.user_parts.push_back(TextPart{render_template(prompt.user_template, item)});
  }
  if (kind != PredictorKind::TextOnly) {
    request.user_parts.push_back(ImagePartData{img->media_type, img->bytes});
  }
  return request;
}

ChatRequest with_correction(const ChatRequest& request, const std::string& error_message) {
  ChatRequest corrected = request;
  corrected.user_parts.push_back(
      TextPart{"Your previous reply was rejected: " + error_message +
               ". Respond again with a single JSON object that matches the schema exactly."});
  return corrected;
}

}  // namespace dvl::schemas
