#pragma once

#include <span>
#include <vector>

namespace dvl::image {

// Renders an SVG document to an opaque RGB PNG, target_width pixels wide with
// the height chosen to preserve the viewBox (or width/height) aspect ratio.
// The canvas starts white; anti-aliasing comes from 4x4 supersampling, so
// output bytes are identical for identical inputs.
//
// Supported subset (enough for chart exports): rect, circle, ellipse, line,
// polyline, polygon and path (M/L/H/V/C/S/Q/T/A/Z, absolute and relative);
// g containers; fill/stroke/stroke-width/opacity via attributes or style="";
// hex, rgb() and the common named colors; translate/scale/rotate/matrix
// transforms. Text elements are skipped (no font rendering).
//
// Throws SvgParseError on malformed XML or path data, RenderError when the
// document has no usable dimensions.
std::vector<unsigned char> rasterize_svg(std::span<const unsigned char> svg_bytes,
                                         int target_width = 1024);

}  // namespace dvl::image
