#include "dvl/ingestion.hpp"

#include "dvl/errors.hpp"
#include "dvl/rng.hpp"

#include <doctest.h>

#include <sstream>

using namespace dvl::ingestion;

namespace {

const char* kHeader = "item_id,image_url,question_text,possible_responses,incorrect_response\n";

std::string rows(const std::string& body) { return std::string(kHeader) + body; }

}  // namespace

TEST_CASE("parse_response_records coerces outcome spellings") {
  const auto records = parse_response_records_string(
      rows("q1,a.png,What is shown?,A|B,1\n"
           "q1,a.png,What is shown?,A|B,0\n"
           "q1,a.png,What is shown?,A|B,true\n"
           "q1,a.png,What is shown?,A|B,FALSE\n"));
  REQUIRE(records.size() == 4);
  CHECK(records[0].incorrect_response == true);
  CHECK(records[1].incorrect_response == false);
  CHECK(records[2].incorrect_response == true);
  CHECK(records[3].incorrect_response == false);
}

TEST_CASE("parse_response_records rejects non-boolean outcomes") {
  CHECK_THROWS_AS(parse_response_records_string(rows("q1,a.png,Q?,A|B,maybe\n")),
                  dvl::InvalidOutcomeError);
}

TEST_CASE("missing required column is named") {
  try {
    parse_response_records_string("item_id,image_url,possible_responses,incorrect_response\nq,u,A,0\n");
    FAIL("expected MissingColumnError");
  } catch (const dvl::MissingColumnError& e) {
    CHECK(e.column() == "question_text");
  }
}

TEST_CASE("rows preserve input order and are never dropped") {
  const auto records = parse_response_records_string(
      rows("q3,u,Q?,A|B,0\nq1,u,Q?,A|B,1\nq2,u,Q?,A|B,0\n"));
  REQUIRE(records.size() == 3);
  CHECK(records[0].item_id == "q3");
  CHECK(records[1].item_id == "q1");
  CHECK(records[2].item_id == "q2");
}

TEST_CASE("option cells are split, trimmed, and empties dropped") {
  const auto records =
      parse_response_records_string(rows("q1,u,Q?, A | B ||C ,0\n"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].possible_responses == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("a custom options delimiter applies") {
  const auto records = parse_response_records_string(rows("q1,u,Q?,A;B;C,0\n"), ParseOptions{';'});
  CHECK(records[0].possible_responses == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("malformed rows report their 1-based data row number") {
  try {
    parse_response_records_string(rows("q1,u,Q?,A|B,0\n,u,Q?,A|B,1\n"));
    FAIL("expected MalformedRowError");
  } catch (const dvl::MalformedRowError& e) {
    CHECK(e.row() == 2);
    CHECK(e.reason() == "item_id is empty");
  }
  CHECK_THROWS_AS(parse_response_records_string(rows("q1,u,,A|B,0\n")), dvl::MalformedRowError);
  CHECK_THROWS_AS(parse_response_records_string(rows("q1,u,Q?, | ,0\n")), dvl::MalformedRowError);
  CHECK_THROWS_AS(parse_response_records_string(rows("q1,u,Q?,A|B\n")), dvl::MalformedRowError);
}

TEST_CASE("unknown extra columns are ignored, participant_id is kept") {
  const auto records = parse_response_records_string(
      "item_id,weird,image_url,question_text,possible_responses,incorrect_response,participant_id\n"
      "q1,zzz,u.png,Q?,A|B,1,p42\n");
  REQUIRE(records.size() == 1);
  CHECK(records[0].participant_id == std::optional<std::string>("p42"));
}

TEST_CASE("manifest parsing rejects duplicates and accepts the empty table") {
  const char* header = "item_id,image_url,question_text,possible_responses\n";
  CHECK(parse_item_manifest_string(header).empty());

  try {
    parse_item_manifest_string(std::string(header) + "q7,u,Q?,A|B\nq7,u,Q?,A|B\n");
    FAIL("expected DuplicateItemError");
  } catch (const dvl::DuplicateItemError& e) {
    CHECK(e.item_id() == "q7");
  }
}

TEST_CASE("a 46-row manifest parses into 46 items") {
  std::ostringstream text;
  text << "item_id,image_url,question_text,possible_responses\n";
  for (int i = 0; i < 46; ++i) {
    text << "item" << i << ",chart" << i << ".png,Question " << i << "?,A|B|C|D\n";
  }
  CHECK(parse_item_manifest_string(text.str()).size() == 46);
}

namespace {

std::string random_text(dvl::SplitMix64& rng, bool allow_tricky) {
  static constexpr char plain[] = "abcXYZ 019";
  static constexpr char tricky[] = "abc,\"\n xyz";
  const char* alphabet = allow_tricky ? tricky : plain;
  const std::size_t alphabet_len = allow_tricky ? sizeof tricky - 1 : sizeof plain - 1;
  std::string out;
  const std::size_t len = 1 + rng.next_below(10);
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.next_below(alphabet_len)]);
  // Parsing trims outer whitespace, so only interior whitespace round-trips.
  out = dvl::ingestion::trim(out);
  return out.empty() ? "x" : out;
}

}  // namespace

TEST_CASE("write/parse round-trips random records field-by-field") {
  dvl::SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ResponseRecord> records;
    const std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) {
      ResponseRecord rec;
      rec.item_id = "item" + std::to_string(rng.next_below(1000));
      rec.image_url = "img/" + std::to_string(i) + ".png";
      // Tricky CSV characters are fine in question text; options must avoid
      // the sub-delimiter and outer whitespace (the writer cannot encode
      // those losslessly).
      rec.question_text = random_text(rng, true);
      const std::size_t n_options = 1 + rng.next_below(4);
      for (std::size_t k = 0; k < n_options; ++k) {
        rec.possible_responses.push_back(random_text(rng, false));
      }
      rec.incorrect_response = rng.next_below(2) == 1;
      if (rng.next_below(2) == 1) rec.participant_id = "p" + std::to_string(i);
      records.push_back(std::move(rec));
    }
    const auto back = parse_response_records_string(write_response_records(records));
    REQUIRE(back == records);
  }
}

TEST_CASE("join_options rejects options containing the delimiter") {
  CHECK_THROWS_AS(join_options({"a|b"}, '|'), dvl::Error);
}
