#pragma once

#include "dvl/image_prep.hpp"
#include "dvl/ingestion.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace dvl::aggregation {

// Per-item ground truth. difficulty is the proportion of incorrect
// responses, easiness = 1 - difficulty; counts are tallied in exact integer
// arithmetic and divided once.
struct ItemAggregate {
  ingestion::ItemContent item;
  double difficulty = 0.0;
  double easiness = 1.0;
  std::size_t n_responses = 0;

  friend bool operator==(const ItemAggregate&, const ItemAggregate&) = default;
};

struct SplitResult {
  std::vector<ItemAggregate> validation;
  std::vector<ItemAggregate> test;
  std::uint64_t seed = 0;
  double fraction = 0.0;
};

// One aggregate per distinct item_id, sorted by item_id ascending. All
// records of an item must agree on its content. Throws EmptyInputError,
// InconsistentItemContentError.
std::vector<ItemAggregate> aggregate_items(const std::vector<ingestion::ResponseRecord>& records);

// Fisher-Yates shuffle over SplitMix64 seeded by `seed`, then the first
// floor(fraction * N) items (floor of the IEEE double product) become the
// validation set. Same seed, same membership. Requires 0 < fraction < 1 and
// non-empty items.
SplitResult split_dataset(std::vector<ItemAggregate> items, double fraction, std::uint64_t seed);

// Keeps items whose format, detected from the image URL extension, is in
// `allowed`. Order-preserving; undetectable URLs are excluded.
std::vector<ItemAggregate> filter_by_format(const std::vector<ItemAggregate>& items,
                                            const std::set<image::ImageFormat::Kind>& allowed);

// CSV with the four aggregate columns first, then the item content columns
// so a written file feeds both evaluate (truth) and predict (manifest):
// item_id, difficulty, easiness, n_responses, image_url, question_text,
// possible_responses.
std::string write_aggregates_csv(const std::vector<ItemAggregate>& items,
                                 const ingestion::ParseOptions& opts = {});
std::vector<ItemAggregate> parse_aggregates_csv_string(const std::string& text,
                                                       const ingestion::ParseOptions& opts = {});

}  // namespace dvl::aggregation
