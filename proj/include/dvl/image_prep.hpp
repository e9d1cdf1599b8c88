#pragma once

#include "dvl/ingestion.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dvl::image {

struct ImageFormat {
  enum class Kind { Png, Svg, Jpeg, Other };

  Kind kind = Kind::Other;
  std::string detail;  // extension or note, only meaningful for Other

  friend bool operator==(const ImageFormat&, const ImageFormat&) = default;
};

std::string_view to_string(ImageFormat::Kind kind);

// Classification is a pure function of the bytes (magic numbers); the URL
// extension is consulted only when bytes are unavailable. PNG: 0x89 'P' 'N'
// 'G'. JPEG: 0xFF 0xD8. SVG: optional BOM/whitespace, then an XML prolog or
// "<svg". Throws UndetectableFormatError when no bytes are given and the URL
// has no extension.
ImageFormat detect_format(std::optional<std::span<const unsigned char>> bytes,
                          std::string_view url);

struct EncodedImage {
  std::string media_type;  // consistent with the payload's magic number
  std::vector<unsigned char> bytes;
  ImageFormat source_format;
  bool rasterized = false;
};

// Fallback is an expected path, not an error: the predictor substitutes the
// configured default prediction for items carrying this marker.
struct FallbackMarker {
  ImageFormat format;
  std::string reason;
};

using PreparedImage = std::variant<EncodedImage, FallbackMarker>;

struct ImagePolicy {
  bool rasterize_svg = false;
  // Formats passed through unmodified.
  std::set<ImageFormat::Kind> allowed = {ImageFormat::Kind::Png, ImageFormat::Kind::Jpeg};
  int raster_width = 1024;
};

// Injectable byte source so predictors can run against local fixtures and
// tests can count reads. Throws IoError on unreadable sources.
class ImageLoader {
public:
  virtual ~ImageLoader() = default;
  virtual std::vector<unsigned char> load(const std::string& url) = 0;
};

// Local paths and file:// URLs.
class FileImageLoader : public ImageLoader {
public:
  FileImageLoader() = default;
  // Relative paths resolve against base_dir when given.
  explicit FileImageLoader(std::filesystem::path base_dir);
  std::vector<unsigned char> load(const std::string& url) override;

private:
  std::filesystem::path base_dir_;
};

// Adds http(s) fetching on top of FileImageLoader; remote images are fetched
// once and stored under cache_dir/images/{sha256}.
std::unique_ptr<ImageLoader> make_default_loader(const std::filesystem::path& cache_dir,
                                                 double timeout_s = 60.0);

// PNG/JPEG pass through; SVG is rasterized to PNG when the policy allows it,
// otherwise a FallbackMarker; Other formats always fall back.
PreparedImage prepare_image(const ingestion::ItemContent& item, const ImagePolicy& policy,
                            ImageLoader& loader);

}  // namespace dvl::image
