#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dvl::io {

// Whole-file reads; throw IoError when the file cannot be opened or read.
std::string read_file(const std::filesystem::path& path);
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temp file and renames into place, so readers never see
// a partial file. Creates parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);

// e.g. "2026-08-09T12:34:56Z"
std::string iso8601_utc_now();

// Shortest round-trip decimal form (std::to_chars), locale-independent.
std::string format_double(double value);
double parse_double(std::string_view text);  // throws dvl::Error on junk

}  // namespace dvl::io
