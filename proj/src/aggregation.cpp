#include "dvl/aggregation.hpp"

#include "dvl/csv.hpp"
#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"
#include "dvl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dvl::aggregation {

std::vector<ItemAggregate> aggregate_items(const std::vector<ingestion::ResponseRecord>& records) {
  if (records.empty()) throw EmptyInputError("aggregate_items: no records");

  struct Tally {
    ingestion::ItemContent content;
    std::size_t incorrect = 0;
    std::size_t total = 0;
  };
  // std::map keeps item_id order lexicographic, which is the canonical order.
  std::map<std::string, Tally> tallies;

  for (const auto& rec : records) {
    auto [it, inserted] = tallies.try_emplace(rec.item_id);
    Tally& tally = it->second;
    if (inserted) {
      tally.content = {rec.item_id, rec.image_url, rec.question_text, rec.possible_responses};
    } else {
      if (tally.content.image_url != rec.image_url)
        throw InconsistentItemContentError(rec.item_id, "image_url");
      if (tally.content.question_text != rec.question_text)
        throw InconsistentItemContentError(rec.item_id, "question_text");
      if (tally.content.possible_responses != rec.possible_responses)
        throw InconsistentItemContentError(rec.item_id, "possible_responses");
    }
    tally.total += 1;
    tally.incorrect += rec.incorrect_response ? 1 : 0;
  }

  std::vector<ItemAggregate> out;
  out.reserve(tallies.size());
  for (auto& [id, tally] : tallies) {
    ItemAggregate agg;
    agg.item = std::move(tally.content);
    agg.difficulty = static_cast<double>(tally.incorrect) / static_cast<double>(tally.total);
    agg.easiness = 1.0 - agg.difficulty;
    agg.n_responses = tally.total;
    out.push_back(std::move(agg));
  }
  return out;
}

SplitResult split_dataset(std::vector<ItemAggregate> items, double fraction, std::uint64_t seed) {
  if (items.empty()) throw EmptyInputError("split_dataset: no items");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error("split_dataset: fraction must lie in (0,1), got " + io::format_double(fraction));
  }

  SplitMix64 rng(seed);
  fisher_yates_shuffle(items, rng);

  const auto n_validation = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(items.size())));

  SplitResult result;
  result.seed = seed;
  result.fraction = fraction;
  result.validation.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_validation));
  result.test.assign(items.begin() + static_cast<std::ptrdiff_t>(n_validation), items.end());
  return result;
}

std::vector<ItemAggregate> filter_by_format(const std::vector<ItemAggregate>& items,
                                            const std::set<image::ImageFormat::Kind>& allowed) {
  std::vector<ItemAggregate> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    try {
      const image::ImageFormat format = image::detect_format(std::nullopt, item.item.image_url);
      if (allowed.count(format.kind)) out.push_back(item);
    } catch (const UndetectableFormatError&) {
      // No extension to classify by; cannot prove membership, so drop.
    }
  }
  return out;
}

std::string write_aggregates_csv(const std::vector<ItemAggregate>& items,
                                 const ingestion::ParseOptions& opts) {
  csv::Table table;
  table.header = {"item_id",   "difficulty",    "easiness",          "n_responses",
                  "image_url", "question_text", "possible_responses"};
  for (const auto& agg : items) {
    table.rows.push_back({agg.item.item_id, io::format_double(agg.difficulty),
                          io::format_double(agg.easiness), std::to_string(agg.n_responses),
                          agg.item.image_url, agg.item.question_text,
                          ingestion::join_options(agg.item.possible_responses,
                                                  opts.options_delimiter)});
  }
  return csv::write_string(table);
}

std::vector<ItemAggregate> parse_aggregates_csv_string(const std::string& text,
                                                       const ingestion::ParseOptions& opts) {
  const csv::Table table = csv::read_string(text);
  const int c_id = table.column_index("item_id");
  const int c_difficulty = table.column_index("difficulty");
  const int c_easiness = table.column_index("easiness");
  const int c_n = table.column_index("n_responses");
  const int c_url = table.column_index("image_url");
  const int c_question = table.column_index("question_text");
  const int c_options = table.column_index("possible_responses");
  if (c_id < 0) throw MissingColumnError("item_id");
  if (c_difficulty < 0) throw MissingColumnError("difficulty");
  if (c_easiness < 0) throw MissingColumnError("easiness");
  if (c_n < 0) throw MissingColumnError("n_responses");

  std::vector<ItemAggregate> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw MalformedRowError(r + 1, "expected " + std::to_string(table.header.size()) +
                                         " fields, got " + std::to_string(row.size()));
    }
    ItemAggregate agg;
    agg.item.item_id = row[static_cast<std::size_t>(c_id)];
    agg.difficulty = io::parse_double(row[static_cast<std::size_t>(c_difficulty)]);
    agg.easiness = io::parse_double(row[static_cast<std::size_t>(c_easiness)]);
    agg.n_responses = static_cast<std::size_t>(
        std::stoull(row[static_cast<std::size_t>(c_n)]));
    if (c_url >= 0) agg.item.image_url = row[static_cast<std::size_t>(c_url)];
    if (c_question >= 0) agg.item.question_text = row[static_cast<std::size_t>(c_question)];
    if (c_options >= 0) {
      agg.item.possible_responses =
          ingestion::split_options(row[static_cast<std::size_t>(c_options)], opts.options_delimiter);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

}  // namespace dvl::aggregation
