#include "dvl/png_write.hpp"

#include "dvl/errors.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>

namespace dvl::image {

namespace {

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void push_chunk(std::vector<unsigned char>& out, const char type[4],
                const std::vector<unsigned char>& data) {
  push_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = static_cast<std::uint32_t>(
      ::crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
  push_u32(out, crc);
}

}  // namespace

std::vector<unsigned char> encode_png_rgb8(const Rgb8Image& image) {
  if (image.width <= 0 || image.height <= 0) throw RenderError("png: empty image");
  const auto w = static_cast<std::size_t>(image.width);
  const auto h = static_cast<std::size_t>(image.height);
  if (image.pixels.size() != w * h * 3) throw RenderError("png: pixel buffer size mismatch");

  // Raw scanlines, each prefixed with filter byte 0.
  std::vector<unsigned char> raw;
  raw.reserve(h * (w * 3 + 1));
  for (std::size_t y = 0; y < h; ++y) {
    raw.push_back(0);
    const unsigned char* row = image.pixels.data() + y * w * 3;
    raw.insert(raw.end(), row, row + w * 3);
  }

  uLongf compressed_size = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(compressed_size);
  if (::compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw RenderError("png: deflate failed");
  }
  compressed.resize(compressed_size);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

  std::vector<unsigned char> ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(image.width));
  push_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // filter method 0
  ihdr.push_back(0);  // no interlace
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", compressed);
  push_chunk(out, "IEND", {});
  return out;
}

}  // namespace dvl::image
