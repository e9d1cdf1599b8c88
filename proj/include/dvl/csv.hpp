#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dvl::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1 when absent.
  int column_index(std::string_view name) const;
};

// RFC-4180 reader: comma-delimited, double-quote quoting with "" escapes,
// quoted fields may contain commas, quotes and newlines; LF and CRLF both
// accepted. The first record is the header. Throws dvl::Error on an
// unterminated quoted field. Rows keep their original order and width.
Table read(std::istream& in);
Table read_string(const std::string& text);

// Writer: quotes a field iff it contains a comma, quote, CR or LF; LF line
// endings. read(write(t)) == t for any table.
std::string format_field(std::string_view field);
void write(std::ostream& out, const Table& table);
std::string write_string(const Table& table);

}  // namespace dvl::csv
