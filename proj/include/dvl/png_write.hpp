#pragma once

#include <cstddef>
#include <vector>

namespace dvl::image {

// Row-major 8-bit RGB, 3 bytes per pixel.
struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;
};

// Minimal PNG encoder (8-bit truecolor, no interlace, zlib-compressed IDAT
// with filter type 0). Deterministic for a given zlib version.
std::vector<unsigned char> encode_png_rgb8(const Rgb8Image& image);

}  // namespace dvl::image
