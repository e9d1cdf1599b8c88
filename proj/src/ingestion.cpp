#include "dvl/ingestion.hpp"

#include "dvl/csv.hpp"
#include "dvl/errors.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace dvl::ingestion {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_options(std::string_view cell, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= cell.size(); ++i) {
    if (i == cell.size() || cell[i] == delimiter) {
      std::string piece = trim(cell.substr(start, i - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = i + 1;
    }
  }
  return out;
}

std::string join_options(const std::vector<std::string>& options, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].find(delimiter) != std::string::npos) {
      throw Error("option contains the sub-delimiter '" + std::string(1, delimiter) +
                  "' and cannot round-trip: \"" + options[i] + "\"");
    }
    if (i) out.push_back(delimiter);
    out += options[i];
  }
  return out;
}

bool parse_outcome(std::string_view value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw InvalidOutcomeError(std::string(value));
}

namespace {

struct ColumnIndices {
  int item_id = -1;
  int image_url = -1;
  int question_text = -1;
  int possible_responses = -1;
  int incorrect_response = -1;
  int participant_id = -1;
};

ColumnIndices resolve_columns(const csv::Table& table, bool need_outcome) {
  ColumnIndices cols;
  cols.item_id = table.column_index("item_id");
  cols.image_url = table.column_index("image_url");
  cols.question_text = table.column_index("question_text");
  cols.possible_responses = table.column_index("possible_responses");
  cols.incorrect_response = table.column_index("incorrect_response");
  cols.participant_id = table.column_index("participant_id");

  if (cols.item_id < 0) throw MissingColumnError("item_id");
  if (cols.image_url < 0) throw MissingColumnError("image_url");
  if (cols.question_text < 0) throw MissingColumnError("question_text");
  if (cols.possible_responses < 0) throw MissingColumnError("possible_responses");
  if (need_outcome && cols.incorrect_response < 0) throw MissingColumnError("incorrect_response");
  return cols;
}

const std::string& cell(const std::vector<std::string>& row, int index) {
  return row[static_cast<std::size_t>(index)];
}

// Shared field extraction + validation for both parsers. row_number is the
// 1-based data-row index used in error messages.
ItemContent parse_content(const std::vector<std::string>& row, const ColumnIndices& cols,
                          std::size_t row_number, std::size_t width, char options_delimiter) {
  if (row.size() != width) {
    throw MalformedRowError(row_number, "expected " + std::to_string(width) + " fields, got " +
                                            std::to_string(row.size()));
  }
  ItemContent content;
  content.item_id = trim(cell(row, cols.item_id));
  content.image_url = trim(cell(row, cols.image_url));
  content.question_text = trim(cell(row, cols.question_text));
  content.possible_responses = split_options(cell(row, cols.possible_responses), options_delimiter);

  if (content.item_id.empty()) throw MalformedRowError(row_number, "item_id is empty");
  if (content.question_text.empty()) throw MalformedRowError(row_number, "question_text is empty");
  if (content.possible_responses.empty()) {
    throw MalformedRowError(row_number, "possible_responses has no entries");
  }
  return content;
}

}  // namespace

std::vector<ResponseRecord> parse_response_records(std::istream& in, const ParseOptions& opts) {
  const csv::Table table = csv::read(in);
  const ColumnIndices cols = resolve_columns(table, /*need_outcome=*/true);

  std::vector<ResponseRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ItemContent content = parse_content(row, cols, r + 1, table.header.size(), opts.options_delimiter);

    ResponseRecord rec;
    rec.item_id = std::move(content.item_id);
    rec.image_url = std::move(content.image_url);
    rec.question_text = std::move(content.question_text);
    rec.possible_responses = std::move(content.possible_responses);
    rec.incorrect_response = parse_outcome(cell(row, cols.incorrect_response));
    if (cols.participant_id >= 0) {
      std::string pid = trim(cell(row, cols.participant_id));
      if (!pid.empty()) rec.participant_id = std::move(pid);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ResponseRecord> parse_response_records_string(const std::string& text,
                                                          const ParseOptions& opts) {
  std::istringstream in(text);
  return parse_response_records(in, opts);
}

std::vector<ItemContent> parse_item_manifest(std::istream& in, const ParseOptions& opts) {
  const csv::Table table = csv::read(in);
  const ColumnIndices cols = resolve_columns(table, /*need_outcome=*/false);

  std::vector<ItemContent> items;
  items.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ItemContent content =
        parse_content(table.rows[r], cols, r + 1, table.header.size(), opts.options_delimiter);
    if (!seen.insert(content.item_id).second) throw DuplicateItemError(content.item_id);
    items.push_back(std::move(content));
  }
  return items;
}

std::vector<ItemContent> parse_item_manifest_string(const std::string& text,
                                                    const ParseOptions& opts) {
  std::istringstream in(text);
  return parse_item_manifest(in, opts);
}

std::string write_response_records(const std::vector<ResponseRecord>& records,
                                   const ParseOptions& opts) {
  csv::Table table;
  table.header = {"item_id",           "image_url",          "question_text",
                  "possible_responses", "incorrect_response", "participant_id"};
  for (const auto& rec : records) {
    table.rows.push_back({rec.item_id, rec.image_url, rec.question_text,
                          join_options(rec.possible_responses, opts.options_delimiter),
                          rec.incorrect_response ? "1" : "0",
                          rec.participant_id.value_or("")});
  }
  return csv::write_string(table);
}

std::string write_item_manifest(const std::vector<ItemContent>& items, const ParseOptions& opts) {
  csv::Table table;
  table.header = {"item_id", "image_url", "question_text", "possible_responses"};
  for (const auto& item : items) {
    table.rows.push_back({item.item_id, item.image_url, item.question_text,
                          join_options(item.possible_responses, opts.options_delimiter)});
  }
  return csv::write_string(table);
}

}  // namespace dvl::ingestion
