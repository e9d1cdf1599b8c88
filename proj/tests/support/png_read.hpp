#pragma once

// Independent PNG decoder (libpng) for verifying rasterizer output.

#include <cstddef>
#include <span>
#include <vector>

namespace testpng {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // 3 bytes per pixel, row-major

  // Pixel accessor; returns {r,g,b}.
  std::array<unsigned char, 3> at(int x, int y) const;
};

Image decode(std::span<const unsigned char> png_bytes);  // throws std::runtime_error

}  // namespace testpng
