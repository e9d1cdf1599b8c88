#include "dvl/predictors.hpp"

#include "dvl/csv.hpp"
#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <istream>
#include <mutex>
#include <sstream>
#include <thread>

namespace dvl::predictors {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::ModelCall: return "model";
    case Provenance::CacheHit: return "cache";
    case Provenance::Fallback: return "fallback";
  }
  return "model";
}

Provenance provenance_from_string(std::string_view name) {
  if (name == "model") return Provenance::ModelCall;
  if (name == "cache") return Provenance::CacheHit;
  if (name == "fallback") return Provenance::Fallback;
  throw Error("unknown provenance: \"" + std::string(name) + "\"");
}

namespace {

PredictionRecord fallback_record(schemas::PredictorKind kind, const ingestion::ItemContent& item,
                                 const Deps& deps, const BatchConfig& config) {
  PredictionRecord record;
  record.item_id = item.item_id;
  record.kind = kind;
  record.prediction = config.fallback_value;
  record.provenance = Provenance::Fallback;
  record.prompt_version = deps.prompts.version();
  record.model_id = deps.client.config().model_id;
  record.timestamp = io::iso8601_utc_now();
  return record;
}

}  // namespace

PredictionRecord predict_item(schemas::PredictorKind kind, const ingestion::ItemContent& item,
                              const Deps& deps, const BatchConfig& config) {
  try {
    std::optional<image::EncodedImage> encoded;
    if (kind != schemas::PredictorKind::TextOnly) {
      image::PreparedImage prepared = image::prepare_image(item, config.image_policy, deps.images);
      if (std::holds_alternative<image::FallbackMarker>(prepared)) {
        return fallback_record(kind, item, deps, config);
      }
      encoded = std::move(std::get<image::EncodedImage>(prepared));
    }

    schemas::RequestConfig request_config;
    request_config.model_id = deps.client.config().model_id;
    request_config.temperature = config.temperature;
    request_config.max_output_tokens = config.max_output_tokens;

    schemas::ChatRequest request =
        schemas::build_request(kind, item, encoded, request_config, deps.prompts);
    request.user_tag = item.item_id;

    llm::CompletionResult result = deps.client.complete(request);
    schemas::ItemAnalysis analysis;
    try {
      analysis = schemas::parse_structured_response(result.content, kind);
    } catch (const Error& first_error) {
      const bool retryable = dynamic_cast<const SchemaViolationError*>(&first_error) != nullptr ||
                             dynamic_cast<const OutOfRangeError*>(&first_error) != nullptr;
      if (!retryable) throw;
      // One corrective re-ask, then give up.
      const schemas::ChatRequest corrected =
          schemas::with_correction(request, first_error.what());
      result = deps.client.complete(corrected);
      analysis = schemas::parse_structured_response(result.content, kind);
    }

    PredictionRecord record;
    record.item_id = item.item_id;
    record.kind = kind;
    record.prediction = schemas::prediction_of(analysis);
    record.provenance = result.from_cache ? Provenance::CacheHit : Provenance::ModelCall;
    record.analysis = std::move(analysis);
    record.prompt_version = deps.prompts.version();
    record.model_id = deps.client.config().model_id;
    record.timestamp = io::iso8601_utc_now();
    return record;
  } catch (const AuthError&) {
    throw;  // global problem, not an item-level one
  } catch (const PredictionFailedError&) {
    throw;
  } catch (const std::exception& e) {
    throw PredictionFailedError(item.item_id, e.what());
  }
}

BatchResult predict_batch(schemas::PredictorKind kind,
                          const std::vector<ingestion::ItemContent>& items, const Deps& deps,
                          const BatchConfig& config) {
  if (items.empty()) throw EmptyInputError("predict_batch: no items");
  if (config.max_concurrency < 1) throw Error("predict_batch: max_concurrency must be >= 1");

  std::vector<std::optional<PredictionRecord>> slots(items.size());
  std::vector<std::optional<ItemFailure>> failure_slots(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex auth_mutex;
  std::exception_ptr auth_failure;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t index = next.fetch_add(1);
      if (index >= items.size()) return;
      try {
        slots[index] = predict_item(kind, items[index], deps, config);
      } catch (const AuthError&) {
        {
          std::lock_guard lock(auth_mutex);
          if (!auth_failure) auth_failure = std::current_exception();
        }
        stop.store(true);
        return;
      } catch (const std::exception& e) {
        failure_slots[index] = ItemFailure{index, items[index].item_id, e.what()};
      }
    }
  };

  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrency), items.size());
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (std::size_t i = 0; i < thread_count; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (auth_failure) std::rethrow_exception(auth_failure);

  BatchResult result;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (slots[i]) {
      result.records.push_back(std::move(*slots[i]));
    } else if (failure_slots[i]) {
      result.failures.push_back(std::move(*failure_slots[i]));
    }
  }
  if (result.records.empty()) {
    throw Error("predict_batch: all " + std::to_string(items.size()) + " items failed; first: " +
                (result.failures.empty() ? "unknown" : result.failures.front().message));
  }
  return result;
}

std::string write_predictions_csv(const std::vector<PredictionRecord>& records) {
  csv::Table table;
  table.header = {"item_id", "kind", "prediction", "provenance", "model_id", "prompt_version"};
  for (const auto& rec : records) {
    table.rows.push_back({rec.item_id, std::string(schemas::to_string(rec.kind)),
                          io::format_double(rec.prediction), std::string(to_string(rec.provenance)),
                          rec.model_id, rec.prompt_version});
  }
  return csv::write_string(table);
}

std::vector<PredictionRecord> parse_predictions_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const int c_id = table.column_index("item_id");
  const int c_kind = table.column_index("kind");
  const int c_prediction = table.column_index("prediction");
  const int c_provenance = table.column_index("provenance");
  const int c_model = table.column_index("model_id");
  const int c_version = table.column_index("prompt_version");
  if (c_id < 0) throw MissingColumnError("item_id");
  if (c_prediction < 0) throw MissingColumnError("prediction");

  std::vector<PredictionRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw MalformedRowError(r + 1, "expected " + std::to_string(table.header.size()) +
                                         " fields, got " + std::to_string(row.size()));
    }
    PredictionRecord rec;
    rec.item_id = row[static_cast<std::size_t>(c_id)];
    if (c_kind >= 0) rec.kind = schemas::kind_from_string(row[static_cast<std::size_t>(c_kind)]);
    rec.prediction = io::parse_double(row[static_cast<std::size_t>(c_prediction)]);
    if (c_provenance >= 0) {
      rec.provenance = provenance_from_string(row[static_cast<std::size_t>(c_provenance)]);
    }
    if (c_model >= 0) rec.model_id = row[static_cast<std::size_t>(c_model)];
    if (c_version >= 0) rec.prompt_version = row[static_cast<std::size_t>(c_version)];
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<PredictionRecord> parse_predictions_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_predictions_csv(in);
}

std::string write_submission_csv(const std::vector<PredictionRecord>& records) {
  csv::Table table;
  table.header = {"item_id", "prediction"};
  for (const auto& rec : records) {
    table.rows.push_back(
        {rec.item_id, io::format_double(std::clamp(rec.prediction, 0.0, 1.0))});
  }
  return csv::write_string(table);
}

}  // namespace dvl::predictors
