#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dvl {

// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---- ingestion ----

class MissingColumnError : public Error {
public:
  explicit MissingColumnError(std::string column)
      : Error("missing required column: " + column), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

private:
  std::string column_;
};

// Row numbers are 1-based data-row indices (the header is row 0).
class MalformedRowError : public Error {
public:
  MalformedRowError(std::size_t row, std::string reason)
      : Error("row " + std::to_string(row) + ": " + reason), row_(row), reason_(std::move(reason)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::size_t row_;
  std::string reason_;
};

class InvalidOutcomeError : public Error {
public:
  explicit InvalidOutcomeError(std::string value)
      : Error("value not coercible to an outcome boolean: \"" + value + "\""),
        value_(std::move(value)) {}
  const std::string& value() const noexcept { return value_; }

private:
  std::string value_;
};

class DuplicateItemError : public Error {
public:
  explicit DuplicateItemError(std::string item_id)
      : Error("duplicate item_id: " + item_id), item_id_(std::move(item_id)) {}
  const std::string& item_id() const noexcept { return item_id_; }

private:
  std::string item_id_;
};

// ---- aggregation ----

class InconsistentItemContentError : public Error {
public:
  InconsistentItemContentError(std::string item_id, std::string field)
      : Error("records for item " + item_id + " disagree on " + field),
        item_id_(std::move(item_id)), field_(std::move(field)) {}
  const std::string& item_id() const noexcept { return item_id_; }
  const std::string& field() const noexcept { return field_; }

private:
  std::string item_id_;
  std::string field_;
};

// ---- schemas ----

// Retryable: the caller may re-ask the model once with a correction note.
class SchemaViolationError : public Error {
public:
  SchemaViolationError(std::string field, std::string detail)
      : Error("schema violation at \"" + field + "\": " + detail), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }
  static constexpr bool retryable = true;

private:
  std::string field_;
};

// Retryable, same re-ask policy as SchemaViolationError.
class OutOfRangeError : public Error {
public:
  OutOfRangeError(std::string field, double value)
      : Error("field \"" + field + "\" out of range: " + std::to_string(value)),
        field_(std::move(field)), value_(value) {}
  const std::string& field() const noexcept { return field_; }
  double value() const noexcept { return value_; }
  static constexpr bool retryable = true;

private:
  std::string field_;
  double value_;
};

class MissingImageError : public Error {
public:
  explicit MissingImageError(const std::string& kind)
      : Error("predictor kind " + kind + " requires an image and none was supplied") {}
};

// ---- llm client ----

class AuthError : public Error {
public:
  using Error::Error;
};

class RateLimitExhaustedError : public Error {
public:
  using Error::Error;
};

class TransportError : public Error {
public:
  using Error::Error;
};

class NonRetryableStatusError : public Error {
public:
  NonRetryableStatusError(int status, const std::string& body)
      : Error("non-retryable HTTP status " + std::to_string(status) +
              (body.empty() ? "" : ": " + body.substr(0, 200))),
        status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

// ---- image prep ----

class UndetectableFormatError : public Error {
public:
  explicit UndetectableFormatError(const std::string& url)
      : Error("image format undetectable for \"" + url + "\"") {}
};

class SvgParseError : public Error {
public:
  using Error::Error;
};

class RenderError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// ---- predictors / evaluation / cli ----

class EmptyInputError : public Error {
public:
  using Error::Error;
};

class PredictionFailedError : public Error {
public:
  PredictionFailedError(std::string item_id, const std::string& cause)
      : Error("prediction failed for item " + item_id + ": " + cause),
        item_id_(std::move(item_id)) {}
  const std::string& item_id() const noexcept { return item_id_; }

private:
  std::string item_id_;
};

class MissingDataError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace dvl
