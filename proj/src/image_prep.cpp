#include "dvl/image_prep.hpp"

#include "dvl/digest.hpp"
#include "dvl/errors.hpp"
#include "dvl/fsio.hpp"
#include "dvl/llm_client.hpp"
#include "dvl/svg_raster.hpp"

#include <algorithm>
#include <cctype>

namespace dvl::image {

namespace fs = std::filesystem;

std::string_view to_string(ImageFormat::Kind kind) {
  switch (kind) {
    case ImageFormat::Kind::Png: return "png";
    case ImageFormat::Kind::Svg: return "svg";
    case ImageFormat::Kind::Jpeg: return "jpeg";
    case ImageFormat::Kind::Other: return "other";
  }
  return "other";
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Extension of the URL path, without query string or fragment.
std::string url_extension(std::string_view url) {
  std::string_view path = url;
  if (const auto q = path.find_first_of("?#"); q != std::string_view::npos) {
    path = path.substr(0, q);
  }
  const auto slash = path.find_last_of('/');
  const std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot == std::string_view::npos || dot + 1 == name.size()) return {};
  return lowercase(name.substr(dot + 1));
}

bool looks_like_svg(std::span<const unsigned char> bytes) {
  std::size_t i = 0;
  // UTF-8 BOM
  if (bytes.size() >= 3 && bytes[0] == 0xef && bytes[1] == 0xbb && bytes[2] == 0xbf) i = 3;
  while (i < bytes.size() && std::isspace(bytes[i])) ++i;
  const auto starts_with = [&](std::string_view prefix) {
    if (bytes.size() - i < prefix.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), bytes.begin() + static_cast<std::ptrdiff_t>(i),
                      [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; });
  };
  return starts_with("<?xml") || starts_with("<svg");
}

}  // namespace

ImageFormat detect_format(std::optional<std::span<const unsigned char>> bytes,
                          std::string_view url) {
  if (bytes && !bytes->empty()) {
    const auto& b = *bytes;
    if (b.size() >= 4 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G') {
      return {ImageFormat::Kind::Png, {}};
    }
    if (b.size() >= 2 && b[0] == 0xff && b[1] == 0xd8) {
      return {ImageFormat::Kind::Jpeg, {}};
    }
    if (looks_like_svg(b)) {
      return {ImageFormat::Kind::Svg, {}};
    }
    return {ImageFormat::Kind::Other, "unrecognized magic number"};
  }

  const std::string ext = url_extension(url);
  if (ext.empty()) throw UndetectableFormatError(std::string(url));
  if (ext == "png") return {ImageFormat::Kind::Png, {}};
  if (ext == "svg") return {ImageFormat::Kind::Svg, {}};
  if (ext == "jpg" || ext == "jpeg") return {ImageFormat::Kind::Jpeg, {}};
  return {ImageFormat::Kind::Other, ext};
}

FileImageLoader::FileImageLoader(fs::path base_dir) : base_dir_(std::move(base_dir)) {}

std::vector<unsigned char> FileImageLoader::load(const std::string& url) {
  std::string path = url;
  if (path.rfind("file://", 0) == 0) path = path.substr(7);
  fs::path p(path);
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return io::read_file_bytes(p);
}

namespace {

class DefaultLoader : public ImageLoader {
public:
  DefaultLoader(fs::path cache_dir, double timeout_s)
      : files_(), cache_dir_(std::move(cache_dir)), timeout_s_(timeout_s) {}

  std::vector<unsigned char> load(const std::string& url) override {
    if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
      return files_.load(url);
    }
    const fs::path cached = cache_dir_ / "images" / sha256_hex(url);
    if (fs::exists(cached)) return io::read_file_bytes(cached);
    std::vector<unsigned char> bytes = llm::http_get_bytes(url, timeout_s_);
    io::write_file_atomic(cached, std::span<const unsigned char>(bytes));
    return bytes;
  }

private:
  FileImageLoader files_;
  fs::path cache_dir_;
  double timeout_s_;
};

}  // namespace

std::unique_ptr<ImageLoader> make_default_loader(const fs::path& cache_dir, double timeout_s) {
  return std::make_unique<DefaultLoader>(cache_dir, timeout_s);
}

PreparedImage prepare_image(const ingestion::ItemContent& item, const ImagePolicy& policy,
                            ImageLoader& loader) {
  const std::vector<unsigned char> bytes = loader.load(item.image_url);
  const ImageFormat format = detect_format(std::span<const unsigned char>(bytes), item.image_url);

  switch (format.kind) {
    case ImageFormat::Kind::Png:
    case ImageFormat::Kind::Jpeg: {
      if (!policy.allowed.count(format.kind)) {
        return FallbackMarker{format, std::string(to_string(format.kind)) +
                                          " not in the allowed pass-through set"};
      }
      EncodedImage img;
      img.media_type = format.kind == ImageFormat::Kind::Png ? "image/png" : "image/jpeg";
      img.bytes = bytes;
      img.source_format = format;
      img.rasterized = false;
      return img;
    }
    case ImageFormat::Kind::Svg: {
      if (!policy.rasterize_svg) {
        return FallbackMarker{format, "svg input and rasterization is disabled"};
      }
      EncodedImage img;
      img.media_type = "image/png";
      img.bytes = rasterize_svg(std::span<const unsigned char>(bytes), policy.raster_width);
      img.source_format = format;
      img.rasterized = true;
      return img;
    }
    case ImageFormat::Kind::Other:
      break;
  }
  return FallbackMarker{format, "unsupported image format"};
}

}  // namespace dvl::image
