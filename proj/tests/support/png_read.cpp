#include "support/png_read.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <stdexcept>

namespace testpng {

std::array<unsigned char, 3> Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

Image decode(std::span<const unsigned char> png_bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, png_bytes.data(), png_bytes.size())) {
    throw std::runtime_error(std::string("png decode failed: ") + png.message);
  }
  png.format = PNG_FORMAT_RGB;

  Image image;
  image.width = static_cast<int>(png.width);
  image.height = static_cast<int>(png.height);
  image.rgb.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.rgb.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png decode failed: ") + png.message);
  }
  return image;
}

}  // namespace testpng
