#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "woundambit/contour.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/marker_detect.hpp"
#include "woundambit/measure.hpp"
#include "woundambit/raster.hpp"

namespace woundambit {

namespace colors {
inline constexpr Rgb green{0, 255, 0};
inline constexpr Rgb pink{255, 105, 180};
inline constexpr Rgb red{255, 0, 0};
}  // namespace colors

inline void fill_disc(RgbImage& img, Point2d c, double radius, Rgb color) {
  const int r = static_cast<int>(std::ceil(radius));
  const int cx = static_cast<int>(std::lround(c.x)), cy = static_cast<int>(std::lround(c.y));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > radius * radius + 0.25) continue;
      if (img.contains(cx + dx, cy + dy)) img(cx + dx, cy + dy) = color;
    }
  }
}

inline void draw_line(RgbImage& img, Point2d a, Point2d b, Rgb color, int thickness = 1) {
  const double len = distance(a, b);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
  const double radius = (thickness - 1) / 2.0;
  for (int i = 0; i <= steps; ++i) fill_disc(img, a + (b - a) * (static_cast<double>(i) / steps), radius, color);
}

inline void draw_closed(RgbImage& img, std::span<const Point2d> pts, Rgb color, int thickness = 1) {
  for (std::size_t i = 0; i < pts.size(); ++i) draw_line(img, pts[i], pts[(i + 1) % pts.size()], color, thickness);
}

inline void draw_contour(RgbImage& img, const Contour& c, Rgb color, int thickness = 1) {
  std::vector<Point2d> pts;
  pts.reserve(c.size());
  for (const auto& p : c.points) pts.emplace_back(p);
  draw_closed(img, pts, color, thickness);
}

namespace detail {
// 5x7 digits, one row per byte, most significant of the low five bits is the left column.
inline constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits{{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}}};
}  // namespace detail

/// Draws decimal digits centred on `center`, each font pixel scaled to `scale` px.
inline void draw_number(RgbImage& img, int value, Point2d center, int scale, Rgb color) {
  const std::string text = std::to_string(value);
  const int glyph_w = 6 * scale;
  const int total_w = static_cast<int>(text.size()) * glyph_w - scale;
  const int x0 = static_cast<int>(std::lround(center.x)) - total_w / 2;
  const int y0 = static_cast<int>(std::lround(center.y)) - 7 * scale / 2;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') continue;
    const auto& glyph = detail::kDigits[static_cast<std::size_t>(text[i] - '0')];
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (!((glyph[row] >> (4 - col)) & 1)) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            const int x = x0 + static_cast<int>(i) * glyph_w + col * scale + sx;
            const int y = y0 + row * scale + sy;
            if (img.contains(x, y)) img(x, y) = color;
          }
        }
      }
    }
  }
}

/// Measurement visualisation: marker outlines and wound contours in green, height and width
/// segments in pink, marker ids in red at the marker centres.
inline RgbImage render_measurement_overlay(const RgbImage& image,
                                           std::span<const MarkerDetection> markers,
                                           const MeasurementSet& measurements) {
  RgbImage out = image;
  const int t = std::max(1, std::min(image.width(), image.height()) / 300);
  for (const auto& m : markers) draw_closed(out, m.corners, colors::green, t);
  for (const auto& c : measurements.contours) draw_contour(out, c, colors::green, t);
  for (const auto& w : measurements.wounds) {
    draw_line(out, w.height_endpoints[0], w.height_endpoints[1], colors::pink, t + 1);
    draw_line(out, w.width_endpoints[0], w.width_endpoints[1], colors::pink, t + 1);
  }
  for (const auto& m : markers) {
    const double side = distance(m.corners[0], m.corners[1]);
    draw_number(out, m.id, m.center(), std::max(1, static_cast<int>(side / 20)), colors::red);
  }
  return out;
}

/// Mask shown over the photo: tinted foreground and green outer contours.
inline RgbImage render_mask_overlay(const RgbImage& image, const BinaryMask& mask) {
  RgbImage out = image;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!mask.test(x, y)) continue;
      auto& p = out(x, y);
      p = {static_cast<std::uint8_t>((p.r + 255) / 2), static_cast<std::uint8_t>(p.g / 2),
           static_cast<std::uint8_t>((p.b + 255) / 2)};
    }
  }
  const int t = std::max(1, std::min(image.width(), image.height()) / 300);
  for (const auto& c : extract_contours(mask)) draw_contour(out, c, colors::green, t);
  return out;
}

}  // namespace woundambit
