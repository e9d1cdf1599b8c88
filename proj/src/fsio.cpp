#include "dvl/fsio.hpp"

#include "dvl/errors.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace dvl::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return contents;
}

std::vector<unsigned char> read_file_bytes(const fs::path& path) {
  const std::string s = read_file(path);
  return std::vector<unsigned char>(s.begin(), s.end());
}

namespace {

std::atomic<unsigned> tmp_counter{0};

void write_atomic_impl(const fs::path& path, const char* data, std::size_t size) {
  const fs::path parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);

  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                       std::to_string(tmp_counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open temp file " + tmp.string());
    out.write(data, static_cast<std::streamsize>(size));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  write_atomic_impl(path, contents.data(), contents.size());
}

void write_file_atomic(const fs::path& path, std::span<const unsigned char> bytes) {
  write_atomic_impl(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error("not a number: \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace dvl::io
