#include "dvl/svg_raster.hpp"

#include "dvl/errors.hpp"
#include "dvl/png_write.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dvl::image {

namespace {

// ---------------------------------------------------------------- XML ----

struct XmlNode {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<XmlNode> children;

  const std::string* attr(const std::string& key) const {
    const auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
};

// Minimal non-validating XML parser: elements, attributes, comments, CDATA,
// processing instructions and DOCTYPE are handled; text content is discarded
// (SVG geometry lives in attributes). Throws SvgParseError on malformed input.
class XmlParser {
public:
  explicit XmlParser(std::string_view text) : text_(text) {}

  XmlNode parse_document() {
    skip_misc();
    XmlNode root = parse_element(0);
    skip_misc();
    if (pos_ != text_.size()) throw SvgParseError("svg: trailing content after root element");
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& message) const {
    throw SvgParseError("svg: " + message + " at offset " + std::to_string(pos_));
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  void skip_until(std::string_view terminator, const char* what) {
    const auto end = text_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  void skip_doctype() {
    // May contain an internal subset in brackets.
    int brackets = 0;
    while (!eof()) {
      const char c = text_[pos_++];
      if (c == '[') ++brackets;
      else if (c == ']') --brackets;
      else if (c == '>' && brackets == 0) return;
    }
    fail("unterminated DOCTYPE");
  }

  // Skips whitespace, text, comments, PIs and DOCTYPE up to the next element.
  void skip_misc() {
    while (!eof()) {
      if (peek() != '<') {
        ++pos_;  // text/whitespace
        continue;
      }
      if (starts_with("<!--")) {
        pos_ += 4;
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        pos_ += 9;
        skip_until("]]>", "CDATA section");
      } else if (starts_with("<?")) {
        pos_ += 2;
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!")) {
        pos_ += 2;
        skip_doctype();
      } else {
        return;  // an element tag (open or close)
      }
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' ||
           c == '.';
  }

  std::string parse_name() {
    const std::size_t start = pos_;
    while (!eof() && name_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (!eof() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static void append_entity(std::string& out, std::string_view entity) {
    if (entity == "amp") out.push_back('&');
    else if (entity == "lt") out.push_back('<');
    else if (entity == "gt") out.push_back('>');
    else if (entity == "quot") out.push_back('"');
    else if (entity == "apos") out.push_back('\'');
    else if (!entity.empty() && entity[0] == '#') {
      const int base = entity.size() > 1 && (entity[1] == 'x' || entity[1] == 'X') ? 16 : 10;
      const std::string digits(entity.substr(base == 16 ? 2 : 1));
      const long code = std::strtol(digits.c_str(), nullptr, base);
      if (code > 0 && code < 128) out.push_back(static_cast<char>(code));
    }
    // Unknown entities are dropped; they never carry geometry.
  }

  std::string parse_attr_value() {
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected a quoted attribute value");
    ++pos_;
    std::string value;
    while (!eof() && text_[pos_] != quote) {
      const char c = text_[pos_++];
      if (c == '&') {
        const auto end = text_.find(';', pos_);
        if (end == std::string_view::npos) fail("unterminated entity");
        append_entity(value, text_.substr(pos_, end - pos_));
        pos_ = end + 1;
      } else {
        value.push_back(c);
      }
    }
    if (eof()) fail("unterminated attribute value");
    ++pos_;  // closing quote
    return value;
  }

  XmlNode parse_element(int depth) {
    if (depth > 256) fail("element nesting too deep");
    if (peek() != '<') fail("expected '<'");
    ++pos_;
    XmlNode node;
    node.name = parse_name();

    for (;;) {
      skip_space();
      if (eof()) fail("unterminated start tag for <" + node.name + ">");
      if (peek() == '/') {
        ++pos_;
        if (peek() != '>') fail("malformed self-closing tag");
        ++pos_;
        return node;  // self-closing
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      std::string key = parse_name();
      skip_space();
      if (peek() != '=') fail("attribute " + key + " lacks a value");
      ++pos_;
      skip_space();
      node.attrs.emplace(std::move(key), parse_attr_value());
    }

    // Children until the matching close tag.
    for (;;) {
      skip_misc();
      if (eof()) fail("missing close tag for <" + node.name + ">");
      if (starts_with("</")) {
        pos_ += 2;
        const std::string name = parse_name();
        if (name != node.name) {
          fail("mismatched close tag </" + name + "> for <" + node.name + ">");
        }
        skip_space();
        if (peek() != '>') fail("malformed close tag");
        ++pos_;
        return node;
      }
      node.children.push_back(parse_element(depth + 1));
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// ----------------------------------------------------------- geometry ----

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// SVG 2x3 matrix: x' = a*x + c*y + e, y' = b*x + d*y + f.
struct Affine {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  Vec2 apply(Vec2 p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }

  // Composition: (this * o) applies o first, then this.
  Affine operator*(const Affine& o) const {
    return {a * o.a + c * o.b,          b * o.a + d * o.b,
            a * o.c + c * o.d,          b * o.c + d * o.d,
            a * o.e + c * o.f + e,      b * o.e + d * o.f + f};
  }

  double mean_scale() const { return std::sqrt(std::abs(a * d - b * c)); }

  static Affine translate(double dx, double dy) { return {1, 0, 0, 1, dx, dy}; }
  static Affine scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  static Affine rotate(double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double cs = std::cos(rad);
    const double sn = std::sin(rad);
    return {cs, sn, -sn, cs, 0, 0};
  }
};

// -------------------------------------------------------------- color ----

struct Rgba {
  double r = 0, g = 0, b = 0, a = 1;
};

const std::map<std::string, Rgba, std::less<>>& named_colors() {
  auto rgb = [](int r, int g, int b) { return Rgba{r / 255.0, g / 255.0, b / 255.0, 1.0}; };
  static const std::map<std::string, Rgba, std::less<>> colors = {
      {"black", rgb(0, 0, 0)},        {"white", rgb(255, 255, 255)},
      {"red", rgb(255, 0, 0)},        {"green", rgb(0, 128, 0)},
      {"blue", rgb(0, 0, 255)},       {"yellow", rgb(255, 255, 0)},
      {"orange", rgb(255, 165, 0)},   {"purple", rgb(128, 0, 128)},
      {"brown", rgb(165, 42, 42)},    {"pink", rgb(255, 192, 203)},
      {"gray", rgb(128, 128, 128)},   {"grey", rgb(128, 128, 128)},
      {"lightgray", rgb(211, 211, 211)}, {"lightgrey", rgb(211, 211, 211)},
      {"darkgray", rgb(169, 169, 169)},  {"darkgrey", rgb(169, 169, 169)},
      {"dimgray", rgb(105, 105, 105)},   {"silver", rgb(192, 192, 192)},
      {"gainsboro", rgb(220, 220, 220)}, {"whitesmoke", rgb(245, 245, 245)},
      {"maroon", rgb(128, 0, 0)},     {"olive", rgb(128, 128, 0)},
      {"lime", rgb(0, 255, 0)},       {"aqua", rgb(0, 255, 255)},
      {"cyan", rgb(0, 255, 255)},     {"teal", rgb(0, 128, 128)},
      {"navy", rgb(0, 0, 128)},       {"fuchsia", rgb(255, 0, 255)},
      {"magenta", rgb(255, 0, 255)},  {"gold", rgb(255, 215, 0)},
      {"steelblue", rgb(70, 130, 180)},  {"skyblue", rgb(135, 206, 235)},
      {"lightblue", rgb(173, 216, 230)}, {"darkblue", rgb(0, 0, 139)},
      {"darkgreen", rgb(0, 100, 0)},     {"darkred", rgb(139, 0, 0)},
      {"crimson", rgb(220, 20, 60)},     {"indigo", rgb(75, 0, 130)},
      {"violet", rgb(238, 130, 238)},    {"orchid", rgb(218, 112, 214)},
      {"plum", rgb(221, 160, 221)},      {"salmon", rgb(250, 128, 114)},
      {"coral", rgb(255, 127, 80)},      {"tomato", rgb(255, 99, 71)},
      {"khaki", rgb(240, 230, 140)},     {"tan", rgb(210, 180, 140)},
      {"beige", rgb(245, 245, 220)},     {"lavender", rgb(230, 230, 250)},
      {"slategray", rgb(112, 128, 144)}, {"seagreen", rgb(46, 139, 87)},
  };
  return colors;
}

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double svg_stod(const std::string& text) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed == 0) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw SvgParseError("svg: not a number: \"" + text + "\"");
  }
}

std::string lower_copy(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// nullopt means "none" (paint disabled).
std::optional<Rgba> parse_color(std::string_view raw) {
  const std::string text = lower_copy(trim_copy(raw));
  if (text.empty() || text == "none" || text == "transparent") return std::nullopt;
  if (text == "currentcolor") return Rgba{0, 0, 0, 1};

  if (text[0] == '#') {
    const std::string_view hex = std::string_view(text).substr(1);
    auto channel2 = [&](std::size_t i) {
      const int hi = hex_digit(hex[i]), lo = hex_digit(hex[i + 1]);
      if (hi < 0 || lo < 0) throw SvgParseError("svg: bad hex color \"" + text + "\"");
      return (hi * 16 + lo) / 255.0;
    };
    if (hex.size() == 3) {
      auto channel1 = [&](std::size_t i) {
        const int v = hex_digit(hex[i]);
        if (v < 0) throw SvgParseError("svg: bad hex color \"" + text + "\"");
        return (v * 17) / 255.0;
      };
      return Rgba{channel1(0), channel1(1), channel1(2), 1.0};
    }
    if (hex.size() == 6) return Rgba{channel2(0), channel2(2), channel2(4), 1.0};
    throw SvgParseError("svg: bad hex color \"" + text + "\"");
  }

  if (text.rfind("rgb(", 0) == 0 && text.back() == ')') {
    std::vector<double> parts;
    std::string token;
    for (std::size_t i = 4; i < text.size(); ++i) {
      const char c = text[i];
      if (c == ',' || c == ')') {
        const std::string t = trim_copy(token);
        token.clear();
        if (t.empty()) throw SvgParseError("svg: bad rgb() color \"" + text + "\"");
        if (t.back() == '%') {
          parts.push_back(svg_stod(t.substr(0, t.size() - 1)) * 255.0 / 100.0);
        } else {
          parts.push_back(svg_stod(t));
        }
      } else {
        token.push_back(c);
      }
    }
    if (parts.size() != 3) throw SvgParseError("svg: bad rgb() color \"" + text + "\"");
    auto clamp01 = [](double v) { return std::clamp(v / 255.0, 0.0, 1.0); };
    return Rgba{clamp01(parts[0]), clamp01(parts[1]), clamp01(parts[2]), 1.0};
  }

  const auto it = named_colors().find(text);
  if (it != named_colors().end()) return it->second;
  // Unsupported paint (url(#gradient), etc.): render as mid gray rather than
  // dropping the shape.
  return Rgba{0.5, 0.5, 0.5, 1.0};
}

// -------------------------------------------------------------- style ----

struct Style {
  std::optional<Rgba> fill = Rgba{0, 0, 0, 1};  // SVG default: black fill
  std::optional<Rgba> stroke;                   // default: no stroke
  double stroke_width = 1.0;
  double opacity = 1.0;
  double fill_opacity = 1.0;
  double stroke_opacity = 1.0;
};

void apply_style_property(Style& style, const std::string& key, const std::string& value) {
  const std::string v = trim_copy(value);
  if (v == "inherit") return;
  if (key == "fill") style.fill = parse_color(v);
  else if (key == "stroke") style.stroke = parse_color(v);
  else if (key == "stroke-width") style.stroke_width = svg_stod(v);
  else if (key == "opacity") style.opacity *= std::clamp(svg_stod(v), 0.0, 1.0);
  else if (key == "fill-opacity") style.fill_opacity = std::clamp(svg_stod(v), 0.0, 1.0);
  else if (key == "stroke-opacity") style.stroke_opacity = std::clamp(svg_stod(v), 0.0, 1.0);
  // Everything else (fonts, dasharray, linecaps...) is ignored.
}

Style resolve_style(const XmlNode& node, Style inherited) {
  Style style = inherited;
  static constexpr const char* keys[] = {"fill",    "stroke",       "stroke-width",
                                         "opacity", "fill-opacity", "stroke-opacity"};
  for (const char* key : keys) {
    if (const std::string* value = node.attr(key)) apply_style_property(style, key, *value);
  }
  // style="" wins over presentation attributes.
  if (const std::string* css = node.attr("style")) {
    std::string_view rest(*css);
    while (!rest.empty()) {
      const auto semi = rest.find(';');
      const std::string_view decl = rest.substr(0, semi);
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
      const auto colon = decl.find(':');
      if (colon == std::string_view::npos) continue;
      apply_style_property(style, trim_copy(decl.substr(0, colon)),
                           std::string(decl.substr(colon + 1)));
    }
  }
  return style;
}

// ---------------------------------------------------- number scanning ----

// SVG-style number lists: commas or whitespace separate, '-' and '.' may
// start a new number immediately after the previous one.
class NumberScanner {
public:
  explicit NumberScanner(std::string_view text) : text_(text) {}

  void skip_separators() {
    while (pos_ < text_.size() &&
           (std::isspace(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == ',')) {
      ++pos_;
    }
  }

  bool at_number() {
    skip_separators();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  double next_number() {
    skip_separators();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    bool any_digits = false;
    bool seen_dot = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        any_digits = true;
        ++pos_;
      } else if (c == '.' && !seen_dot) {
        seen_dot = true;
        ++pos_;
      } else {
        break;
      }
    }
    if (!any_digits) throw SvgParseError("svg: expected a number in \"" + std::string(text_) + "\"");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t exp = pos_ + 1;
      if (exp < text_.size() && (text_[exp] == '-' || text_[exp] == '+')) ++exp;
      if (exp < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp]))) {
        pos_ = exp;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    return std::stod(std::string(text_.substr(start, pos_ - start)));
  }

  // Arc flags are single characters and may be packed: "011" = 0, 1, 1.
  int next_flag() {
    skip_separators();
    if (pos_ >= text_.size() || (text_[pos_] != '0' && text_[pos_] != '1')) {
      throw SvgParseError("svg: expected an arc flag");
    }
    return text_[pos_++] - '0';
  }

  char peek_command() {
    skip_separators();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  char next_command() { return text_[pos_++]; }

  bool done() {
    skip_separators();
    return pos_ >= text_.size();
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

// ----------------------------------------------------------- outlines ----

using Polygon = std::vector<Vec2>;

struct Subpath {
  std::vector<Vec2> points;
  bool closed = false;
};

constexpr int kCurveSegments = 16;
constexpr int kEllipseSegments = 64;

void flatten_cubic(std::vector<Vec2>& out, Vec2 p0, Vec2 c1, Vec2 c2, Vec2 p1) {
  for (int i = 1; i <= kCurveSegments; ++i) {
    const double t = static_cast<double>(i) / kCurveSegments;
    const double u = 1.0 - t;
    const double w0 = u * u * u, w1 = 3 * u * u * t, w2 = 3 * u * t * t, w3 = t * t * t;
    out.push_back({w0 * p0.x + w1 * c1.x + w2 * c2.x + w3 * p1.x,
                   w0 * p0.y + w1 * c1.y + w2 * c2.y + w3 * p1.y});
  }
}

void flatten_quadratic(std::vector<Vec2>& out, Vec2 p0, Vec2 c, Vec2 p1) {
  for (int i = 1; i <= kCurveSegments; ++i) {
    const double t = static_cast<double>(i) / kCurveSegments;
    const double u = 1.0 - t;
    out.push_back({u * u * p0.x + 2 * u * t * c.x + t * t * p1.x,
                   u * u * p0.y + 2 * u * t * c.y + t * t * p1.y});
  }
}

// Elliptical arc (endpoint parameterization) flattened via cubic segments of
// at most 90 degrees each.
void flatten_arc(std::vector<Vec2>& out, Vec2 p0, double rx, double ry, double rotation_deg,
                 int large_arc, int sweep, Vec2 p1) {
  rx = std::abs(rx);
  ry = std::abs(ry);
  if (rx < 1e-12 || ry < 1e-12) {
    out.push_back(p1);
    return;
  }
  const double phi = rotation_deg * std::numbers::pi / 180.0;
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const double dx2 = (p0.x - p1.x) / 2.0, dy2 = (p0.y - p1.y) / 2.0;
  const double x1p = cphi * dx2 + sphi * dy2;
  const double y1p = -sphi * dx2 + cphi * dy2;

  const double lambda = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
  if (lambda > 1.0) {
    const double s = std::sqrt(lambda);
    rx *= s;
    ry *= s;
  }

  const double rx2 = rx * rx, ry2 = ry * ry;
  double num = rx2 * ry2 - rx2 * y1p * y1p - ry2 * x1p * x1p;
  if (num < 0) num = 0;
  const double den = rx2 * y1p * y1p + ry2 * x1p * x1p;
  double coef = den > 0 ? std::sqrt(num / den) : 0.0;
  if (large_arc == sweep) coef = -coef;
  const double cxp = coef * rx * y1p / ry;
  const double cyp = -coef * ry * x1p / rx;
  const double cx = cphi * cxp - sphi * cyp + (p0.x + p1.x) / 2.0;
  const double cy = sphi * cxp + cphi * cyp + (p0.y + p1.y) / 2.0;

  auto angle = [](double ux, double uy, double vx, double vy) {
    const double dot = ux * vx + uy * vy;
    const double len = std::sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy));
    double a = std::acos(std::clamp(dot / len, -1.0, 1.0));
    if (ux * vy - uy * vx < 0) a = -a;
    return a;
  };
  const double theta1 = angle(1, 0, (x1p - cxp) / rx, (y1p - cyp) / ry);
  double dtheta = angle((x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry);
  if (!sweep && dtheta > 0) dtheta -= 2 * std::numbers::pi;
  if (sweep && dtheta < 0) dtheta += 2 * std::numbers::pi;

  const int segments =
      std::max(1, static_cast<int>(std::ceil(std::abs(dtheta) / (std::numbers::pi / 2))));
  const double delta = dtheta / segments;
  const double k = 4.0 / 3.0 * std::tan(delta / 4.0);

  auto point_at = [&](double theta) -> Vec2 {
    const double x = rx * std::cos(theta), y = ry * std::sin(theta);
    return {cphi * x - sphi * y + cx, sphi * x + cphi * y + cy};
  };
  auto derivative_at = [&](double theta) -> Vec2 {
    const double x = -rx * std::sin(theta), y = ry * std::cos(theta);
    return {cphi * x - sphi * y, sphi * x + cphi * y};
  };

  Vec2 prev = p0;
  for (int i = 0; i < segments; ++i) {
    const double a0 = theta1 + i * delta;
    const double a1 = a0 + delta;
    const Vec2 q1 = point_at(a1);
    const Vec2 d0 = derivative_at(a0);
    const Vec2 d1 = derivative_at(a1);
    flatten_cubic(out, prev, {prev.x + k * d0.x, prev.y + k * d0.y},
                  {q1.x - k * d1.x, q1.y - k * d1.y}, q1);
    prev = q1;
  }
}

std::vector<Subpath> parse_path_data(const std::string& data) {
  NumberScanner scan(data);
  std::vector<Subpath> subpaths;
  Subpath current;
  Vec2 pos{0, 0}, start{0, 0};
  Vec2 prev_cubic_control{0, 0}, prev_quad_control{0, 0};
  char prev_command = '\0';

  auto begin_subpath = [&](Vec2 p) {
    if (current.points.size() > 1) subpaths.push_back(std::move(current));
    current = Subpath{};
    current.points.push_back(p);
    start = p;
  };
  auto line_to = [&](Vec2 p) {
    if (current.points.empty()) current.points.push_back(pos);
    current.points.push_back(p);
  };

  while (!scan.done()) {
    char command = scan.peek_command();
    if (std::isalpha(static_cast<unsigned char>(command))) {
      scan.next_command();
    } else {
      // Implicit repeat of the previous command; M/m repeats as L/l.
      if (prev_command == '\0') throw SvgParseError("svg: path data must start with a command");
      command = prev_command == 'M' ? 'L' : prev_command == 'm' ? 'l' : prev_command;
    }
    const bool relative = std::islower(static_cast<unsigned char>(command));
    const char op = static_cast<char>(std::toupper(static_cast<unsigned char>(command)));
    const Vec2 base = relative ? pos : Vec2{0, 0};

    switch (op) {
      case 'M': {
        const double x = scan.next_number(), y = scan.next_number();
        pos = {base.x + x, base.y + y};
        begin_subpath(pos);
        break;
      }
      case 'L': {
        const double x = scan.next_number(), y = scan.next_number();
        pos = {base.x + x, base.y + y};
        line_to(pos);
        break;
      }
      case 'H': {
        const double x = scan.next_number();
        pos = {(relative ? pos.x : 0) + x, pos.y};
        line_to(pos);
        break;
      }
      case 'V': {
        const double y = scan.next_number();
        pos = {pos.x, (relative ? pos.y : 0) + y};
        line_to(pos);
        break;
      }
      case 'C': {
        const Vec2 c1{base.x + scan.next_number(), base.y + scan.next_number()};
        const Vec2 c2{base.x + scan.next_number(), base.y + scan.next_number()};
        const Vec2 p1{base.x + scan.next_number(), base.y + scan.next_number()};
        if (current.points.empty()) current.points.push_back(pos);
        flatten_cubic(current.points, pos, c1, c2, p1);
        prev_cubic_control = c2;
        pos = p1;
        break;
      }
      case 'S': {
        const char prev_op =
            static_cast<char>(std::toupper(static_cast<unsigned char>(prev_command)));
        const Vec2 c1 = (prev_op == 'C' || prev_op == 'S')
                            ? Vec2{2 * pos.x - prev_cubic_control.x, 2 * pos.y - prev_cubic_control.y}
                            : pos;
        const Vec2 c2{base.x + scan.next_number(), base.y + scan.next_number()};
        const Vec2 p1{base.x + scan.next_number(), base.y + scan.next_number()};
        if (current.points.empty()) current.points.push_back(pos);
        flatten_cubic(current.points, pos, c1, c2, p1);
        prev_cubic_control = c2;
        pos = p1;
        break;
      }
      case 'Q': {
        const Vec2 c{base.x + scan.next_number(), base.y + scan.next_number()};
        const Vec2 p1{base.x + scan.next_number(), base.y + scan.next_number()};
        if (current.points.empty()) current.points.push_back(pos);
        flatten_quadratic(current.points, pos, c, p1);
        prev_quad_control = c;
        pos = p1;
        break;
      }
      case 'T': {
        const char prev_op =
            static_cast<char>(std::toupper(static_cast<unsigned char>(prev_command)));
        const Vec2 c = (prev_op == 'Q' || prev_op == 'T')
                           ? Vec2{2 * pos.x - prev_quad_control.x, 2 * pos.y - prev_quad_control.y}
                           : pos;
        const Vec2 p1{base.x + scan.next_number(), base.y + scan.next_number()};
        if (current.points.empty()) current.points.push_back(pos);
        flatten_quadratic(current.points, pos, c, p1);
        prev_quad_control = c;
        pos = p1;
        break;
      }
      case 'A': {
        const double rx = scan.next_number();
        const double ry = scan.next_number();
        const double rot = scan.next_number();
        const int large_arc = scan.next_flag();
        const int sweep = scan.next_flag();
        const Vec2 p1{base.x + scan.next_number(), base.y + scan.next_number()};
        if (current.points.empty()) current.points.push_back(pos);
        flatten_arc(current.points, pos, rx, ry, rot, large_arc, sweep, p1);
        pos = p1;
        break;
      }
      case 'Z': {
        current.closed = true;
        if (current.points.size() > 1) subpaths.push_back(std::move(current));
        current = Subpath{};
        pos = start;
        current.points.push_back(pos);
        break;
      }
      default:
        throw SvgParseError(std::string("svg: unsupported path command '") + command + "'");
    }
    prev_command = command;
  }
  if (current.points.size() > 1) subpaths.push_back(std::move(current));
  return subpaths;
}

// ---------------------------------------------------------- transforms ----

Affine parse_transform(const std::string& text) {
  Affine result;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ',')) {
      ++pos;
    }
    if (pos >= text.size()) break;
    const auto open = text.find('(', pos);
    if (open == std::string::npos) throw SvgParseError("svg: malformed transform \"" + text + "\"");
    const std::string name = trim_copy(text.substr(pos, open - pos));
    const auto close = text.find(')', open);
    if (close == std::string::npos) throw SvgParseError("svg: malformed transform \"" + text + "\"");
    NumberScanner scan(std::string_view(text).substr(open + 1, close - open - 1));
    std::vector<double> args;
    while (scan.at_number()) args.push_back(scan.next_number());
    pos = close + 1;

    Affine t;
    if (name == "translate") {
      if (args.empty()) throw SvgParseError("svg: translate needs arguments");
      t = Affine::translate(args[0], args.size() > 1 ? args[1] : 0.0);
    } else if (name == "scale") {
      if (args.empty()) throw SvgParseError("svg: scale needs arguments");
      t = Affine::scale(args[0], args.size() > 1 ? args[1] : args[0]);
    } else if (name == "rotate") {
      if (args.size() == 3) {
        t = Affine::translate(args[1], args[2]) * Affine::rotate(args[0]) *
            Affine::translate(-args[1], -args[2]);
      } else if (!args.empty()) {
        t = Affine::rotate(args[0]);
      } else {
        throw SvgParseError("svg: rotate needs arguments");
      }
    } else if (name == "matrix") {
      if (args.size() != 6) throw SvgParseError("svg: matrix needs 6 arguments");
      t = Affine{args[0], args[1], args[2], args[3], args[4], args[5]};
    } else if (name == "skewx") {
      if (args.empty()) throw SvgParseError("svg: skewX needs an argument");
      t = Affine{1, 0, std::tan(args[0] * std::numbers::pi / 180.0), 1, 0, 0};
    } else if (name == "skewy") {
      if (args.empty()) throw SvgParseError("svg: skewY needs an argument");
      t = Affine{1, std::tan(args[0] * std::numbers::pi / 180.0), 0, 1, 0, 0};
    } else {
      throw SvgParseError("svg: unsupported transform \"" + name + "\"");
    }
    result = result * t;
  }
  return result;
}

Affine parse_transform_ci(const std::string& text) {
  return parse_transform(lower_copy(text));
}

// -------------------------------------------------------------- canvas ----

struct PaintOp {
  std::vector<Polygon> polygons;  // device space
  Rgba color;
};

constexpr int kSupersample = 4;

class Canvas {
public:
  Canvas(int width, int height)
      : width_(width), height_(height),
        pixels_(static_cast<std::size_t>(width) * height * 3, 1.0) {}

  void paint(const PaintOp& op) {
    if (op.polygons.empty() || op.color.a <= 0.0) return;

    double min_y = 1e300, max_y = -1e300;
    for (const auto& poly : op.polygons) {
      for (const auto& p : poly) {
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
      }
    }
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(max_y)));

    std::vector<int> counts(static_cast<std::size_t>(width_));
    std::vector<std::pair<double, int>> crossings;  // (x, winding direction)

    for (int py = y0; py <= y1; ++py) {
      std::fill(counts.begin(), counts.end(), 0);
      bool any = false;
      for (int sub = 0; sub < kSupersample; ++sub) {
        const double y = py + (sub + 0.5) / kSupersample;
        crossings.clear();
        for (const auto& poly : op.polygons) {
          const std::size_t n = poly.size();
          for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % n];
            if (a.y == b.y) continue;
            // Half-open span so shared vertices count once.
            if ((y >= a.y && y < b.y) || (y >= b.y && y < a.y)) {
              const double t = (y - a.y) / (b.y - a.y);
              crossings.emplace_back(a.x + t * (b.x - a.x), b.y > a.y ? 1 : -1);
            }
          }
        }
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());
        int winding = 0;
        double span_start = 0.0;
        for (const auto& [x, dir] : crossings) {
          const int next = winding + dir;
          if (winding == 0 && next != 0) {
            span_start = x;
          } else if (winding != 0 && next == 0) {
            add_span(counts, span_start, x);
            any = true;
          }
          winding = next;
        }
      }
      if (!any) continue;

      const double alpha = op.color.a;
      double* row = pixels_.data() + static_cast<std::size_t>(py) * width_ * 3;
      constexpr double norm = 1.0 / (kSupersample * kSupersample);
      for (int px = 0; px < width_; ++px) {
        if (counts[px] == 0) continue;
        const double cover = alpha * counts[px] * norm;
        double* p = row + px * 3;
        p[0] += (op.color.r - p[0]) * cover;
        p[1] += (op.color.g - p[1]) * cover;
        p[2] += (op.color.b - p[2]) * cover;
      }
    }
  }

  Rgb8Image to_image() const {
    Rgb8Image image;
    image.width = width_;
    image.height = height_;
    image.pixels.resize(pixels_.size());
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
      image.pixels[i] =
          static_cast<unsigned char>(std::lround(std::clamp(pixels_[i], 0.0, 1.0) * 255.0));
    }
    return image;
  }

private:
  // Marks supersampled columns covered by the span [x_start, x_end).
  void add_span(std::vector<int>& counts, double x_start, double x_end) {
    const double scaled_start = x_start * kSupersample - 0.5;
    const double scaled_end = x_end * kSupersample - 0.5;
    long s = static_cast<long>(std::ceil(scaled_start));
    long e = static_cast<long>(std::ceil(scaled_end)) - 1;
    s = std::max(s, 0L);
    e = std::min(e, static_cast<long>(width_) * kSupersample - 1);
    for (long sx = s; sx <= e; ++sx) counts[static_cast<std::size_t>(sx / kSupersample)] += 1;
  }

  int width_;
  int height_;
  std::vector<double> pixels_;  // RGB in [0,1]
};

// ------------------------------------------------------ scene building ----

double positive_area(const Polygon& poly) {
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x * b.y - b.x * a.y;
  }
  return area / 2.0;
}

void ensure_ccw(Polygon& poly) {
  if (positive_area(poly) < 0) std::reverse(poly.begin(), poly.end());
}

Polygon transform_points(const std::vector<Vec2>& points, const Affine& ctm) {
  Polygon out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(ctm.apply(p));
  return out;
}

Polygon make_circle(Vec2 center, double rx, double ry) {
  Polygon out;
  out.reserve(kEllipseSegments);
  for (int i = 0; i < kEllipseSegments; ++i) {
    const double a = 2 * std::numbers::pi * i / kEllipseSegments;
    out.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
  }
  return out;
}

// Stroke geometry: one quad per segment plus a round-join disc at interior
// vertices, all oriented CCW so the nonzero rule unions them.
std::vector<Polygon> stroke_polygons(const Polygon& points, bool closed, double width) {
  std::vector<Polygon> out;
  if (points.size() < 2 || width <= 0.0) return out;
  const double half = width / 2.0;

  const std::size_t segment_count = closed ? points.size() : points.size() - 1;
  for (std::size_t i = 0; i < segment_count; ++i) {
    const Vec2& a = points[i];
    const Vec2& b = points[(i + 1) % points.size()];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len < 1e-12) continue;
    const double nx = -dy / len * half, ny = dx / len * half;
    Polygon quad = {{a.x + nx, a.y + ny}, {b.x + nx, b.y + ny},
                    {b.x - nx, b.y - ny}, {a.x - nx, a.y - ny}};
    ensure_ccw(quad);
    out.push_back(std::move(quad));
  }

  const std::size_t first_joint = closed ? 0 : 1;
  const std::size_t last_joint = closed ? points.size() : points.size() - 1;
  for (std::size_t i = first_joint; i < last_joint; ++i) {
    Polygon disc = make_circle(points[i], half, half);
    ensure_ccw(disc);
    out.push_back(std::move(disc));
  }
  return out;
}

double attr_number(const XmlNode& node, const char* name, double fallback) {
  const std::string* value = node.attr(name);
  if (value == nullptr) return fallback;
  try {
    return std::stod(trim_copy(*value));
  } catch (const std::exception&) {
    throw SvgParseError(std::string("svg: attribute ") + name + " is not a number: \"" + *value +
                        "\"");
  }
}

std::vector<Vec2> parse_point_list(const std::string& text) {
  NumberScanner scan(text);
  std::vector<Vec2> points;
  while (scan.at_number()) {
    const double x = scan.next_number();
    if (!scan.at_number()) throw SvgParseError("svg: odd number of point coordinates");
    points.push_back({x, scan.next_number()});
  }
  return points;
}

struct SceneBuilder {
  std::vector<PaintOp>& ops;

  void emit_fill(const std::vector<Polygon>& polygons, const Style& style) {
    if (!style.fill || polygons.empty()) return;
    Rgba color = *style.fill;
    color.a *= style.opacity * style.fill_opacity;
    if (color.a <= 0.0) return;
    ops.push_back({polygons, color});
  }

  void emit_stroke(const std::vector<std::pair<Polygon, bool>>& outlines, const Style& style,
                   const Affine& ctm) {
    if (!style.stroke || style.stroke_width <= 0.0) return;
    Rgba color = *style.stroke;
    color.a *= style.opacity * style.stroke_opacity;
    if (color.a <= 0.0) return;
    const double device_width = style.stroke_width * ctm.mean_scale();
    PaintOp op;
    op.color = color;
    for (const auto& [outline, closed] : outlines) {
      auto quads = stroke_polygons(outline, closed, device_width);
      op.polygons.insert(op.polygons.end(), std::make_move_iterator(quads.begin()),
                         std::make_move_iterator(quads.end()));
    }
    if (!op.polygons.empty()) ops.push_back(std::move(op));
  }

  // Fills use the shape's own winding; strokes are rebuilt in device space.
  void shape(const std::vector<Subpath>& subpaths, const Style& style, const Affine& ctm,
             bool fillable) {
    std::vector<Polygon> fill_polys;
    std::vector<std::pair<Polygon, bool>> outlines;
    for (const auto& sub : subpaths) {
      if (sub.points.size() < 2) continue;
      Polygon device = transform_points(sub.points, ctm);
      if (fillable && sub.points.size() >= 3) fill_polys.push_back(device);
      outlines.emplace_back(std::move(device), sub.closed);
    }
    if (fillable) emit_fill(fill_polys, style);
    emit_stroke(outlines, style, ctm);
  }

  void element(const XmlNode& node, const Style& inherited, const Affine& parent_ctm) {
    Style style = resolve_style(node, inherited);
    Affine ctm = parent_ctm;
    if (const std::string* transform = node.attr("transform")) {
      ctm = ctm * parse_transform_ci(*transform);
    }

    const std::string& name = node.name;
    if (name == "g" || name == "svg" || name == "a") {
      for (const auto& child : node.children) element(child, style, ctm);
      return;
    }
    if (name == "rect") {
      const double x = attr_number(node, "x", 0), y = attr_number(node, "y", 0);
      const double w = attr_number(node, "width", 0), h = attr_number(node, "height", 0);
      if (w <= 0 || h <= 0) return;
      Subpath box;
      box.points = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
      box.closed = true;
      shape({box}, style, ctm, /*fillable=*/true);
      return;
    }
    if (name == "circle" || name == "ellipse") {
      const double cx = attr_number(node, "cx", 0), cy = attr_number(node, "cy", 0);
      const double rx =
          name == "circle" ? attr_number(node, "r", 0) : attr_number(node, "rx", 0);
      const double ry =
          name == "circle" ? attr_number(node, "r", 0) : attr_number(node, "ry", 0);
      if (rx <= 0 || ry <= 0) return;
      Subpath ring;
      ring.points = make_circle({cx, cy}, rx, ry);
      ring.closed = true;
      shape({ring}, style, ctm, /*fillable=*/true);
      return;
    }
    if (name == "line") {
      Subpath seg;
      seg.points = {{attr_number(node, "x1", 0), attr_number(node, "y1", 0)},
                    {attr_number(node, "x2", 0), attr_number(node, "y2", 0)}};
      shape({seg}, style, ctm, /*fillable=*/false);
      return;
    }
    if (name == "polyline" || name == "polygon") {
      const std::string* points = node.attr("points");
      if (points == nullptr) return;
      Subpath sub;
      sub.points = parse_point_list(*points);
      sub.closed = name == "polygon";
      shape({sub}, style, ctm, /*fillable=*/true);
      return;
    }
    if (name == "path") {
      const std::string* data = node.attr("d");
      if (data == nullptr) return;
      shape(parse_path_data(*data), style, ctm, /*fillable=*/true);
      return;
    }
    // text, defs, metadata, style, use, images...: not rendered.
  }
};

struct ViewBox {
  double min_x = 0, min_y = 0, width = 0, height = 0;
};

double parse_length(const std::string& text) {
  std::string t = trim_copy(text);
  if (t.size() > 2 && t.compare(t.size() - 2, 2, "px") == 0) t = t.substr(0, t.size() - 2);
  if (!t.empty() && t.back() == '%') {
    throw RenderError("svg: percentage root dimensions need a viewBox");
  }
  return svg_stod(t);
}

ViewBox resolve_viewbox(const XmlNode& root) {
  if (const std::string* vb = root.attr("viewBox")) {
    NumberScanner scan(*vb);
    ViewBox box;
    box.min_x = scan.next_number();
    box.min_y = scan.next_number();
    box.width = scan.next_number();
    box.height = scan.next_number();
    if (box.width <= 0 || box.height <= 0) throw RenderError("svg: degenerate viewBox");
    return box;
  }
  const std::string* w = root.attr("width");
  const std::string* h = root.attr("height");
  if (w == nullptr || h == nullptr) {
    throw RenderError("svg: root element lacks both viewBox and width/height");
  }
  ViewBox box;
  box.width = parse_length(*w);
  box.height = parse_length(*h);
  if (box.width <= 0 || box.height <= 0) throw RenderError("svg: degenerate dimensions");
  return box;
}

}  // namespace

std::vector<unsigned char> rasterize_svg(std::span<const unsigned char> svg_bytes,
                                         int target_width) {
  if (target_width < 1) throw RenderError("svg: target width must be >= 1");

  std::string_view text(reinterpret_cast<const char*>(svg_bytes.data()), svg_bytes.size());
  // UTF-8 BOM.
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xef &&
      static_cast<unsigned char>(text[1]) == 0xbb && static_cast<unsigned char>(text[2]) == 0xbf) {
    text.remove_prefix(3);
  }

  XmlParser parser(text);
  const XmlNode root = parser.parse_document();
  if (root.name != "svg") throw SvgParseError("svg: root element is <" + root.name + ">");

  const ViewBox box = resolve_viewbox(root);
  const int target_height = std::max(
      1, static_cast<int>(std::lround(target_width * box.height / box.width)));

  const Affine viewport = Affine::scale(target_width / box.width, target_height / box.height) *
                          Affine::translate(-box.min_x, -box.min_y);

  std::vector<PaintOp> ops;
  SceneBuilder builder{ops};
  for (const auto& child : root.children) builder.element(child, Style{}, viewport);

  Canvas canvas(target_width, target_height);
  for (const auto& op : ops) canvas.paint(op);
  return encode_png_rgb8(canvas.to_image());
}

}  // namespace dvl::image
