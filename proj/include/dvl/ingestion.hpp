#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dvl::ingestion {

// One participant's answer to one item. incorrect_response == true means the
// participant answered incorrectly.
struct ResponseRecord {
  std::string item_id;
  std::string image_url;
  std::string question_text;
  std::vector<std::string> possible_responses;
  bool incorrect_response = false;
  std::optional<std::string> participant_id;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

// The item-level view a predictor sees: no response outcomes.
struct ItemContent {
  std::string item_id;
  std::string image_url;
  std::string question_text;
  std::vector<std::string> possible_responses;

  friend bool operator==(const ItemContent&, const ItemContent&) = default;
};

struct ParseOptions {
  // Sub-delimiter inside the possible_responses cell.
  char options_delimiter = '|';
};

// Input format: UTF-8 CSV, comma-delimited, RFC-4180 quoting, first row a
// header naming at least item_id, image_url, question_text,
// possible_responses, incorrect_response (plus optional participant_id).
// Unknown extra columns are ignored. Cell values are trimmed; empty
// possible_responses entries after trimming are dropped. incorrect_response
// accepts 0/1/true/false (case-insensitive).
//
// Throws MissingColumnError, MalformedRowError (1-based data-row numbers),
// InvalidOutcomeError. Rows are never reordered or silently dropped.
std::vector<ResponseRecord> parse_response_records(std::istream& in, const ParseOptions& opts = {});
std::vector<ResponseRecord> parse_response_records_string(const std::string& text,
                                                          const ParseOptions& opts = {});

// Same table minus incorrect_response; duplicate item_id is an error.
// Throws DuplicateItemError, MissingColumnError, MalformedRowError.
std::vector<ItemContent> parse_item_manifest(std::istream& in, const ParseOptions& opts = {});
std::vector<ItemContent> parse_item_manifest_string(const std::string& text,
                                                    const ParseOptions& opts = {});

// Writers round-trip with the parsers field-by-field. An option containing
// the sub-delimiter cannot round-trip and is rejected with dvl::Error.
std::string write_response_records(const std::vector<ResponseRecord>& records,
                                   const ParseOptions& opts = {});
std::string write_item_manifest(const std::vector<ItemContent>& items,
                                const ParseOptions& opts = {});

std::string trim(std::string_view s);
std::vector<std::string> split_options(std::string_view cell, char delimiter);
std::string join_options(const std::vector<std::string>& options, char delimiter);
bool parse_outcome(std::string_view value);  // throws InvalidOutcomeError

}  // namespace dvl::ingestion
