#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "woundambit/calibration.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/mask.hpp"
#include "woundambit/marker_dictionary.hpp"
#include "woundambit/raster.hpp"

// Analytic rendering of reference sheets and wound scenes with known geometry. Used to
// print sheets and to build test scenes whose true scale is known exactly.

namespace woundambit {

struct Ellipse {
  Point2d center;
  double semi_major = 0;  ///< px
  double semi_minor = 0;  ///< px
  double angle_rad = 0;   ///< rotation of the major axis

  bool contains(Point2d p) const {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    const Point2d d = p - center;
    const double u = d.x * c + d.y * s;
    const double v = -d.x * s + d.y * c;
    return (u * u) / (semi_major * semi_major) + (v * v) / (semi_minor * semi_minor) <= 1.0;
  }

  double area() const { return std::numbers::pi * semi_major * semi_minor; }
};

/// Pixel is foreground iff its centre lies inside some ellipse.
inline BinaryMask rasterize_ellipses(int width, int height, std::span<const Ellipse> ellipses) {
  BinaryMask m(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (const auto& e : ellipses) {
        if (e.contains({static_cast<double>(x), static_cast<double>(y)})) {
          m.set(x, y);
          break;
        }
      }
    }
  }
  return m;
}

/// Printed sheet: white paper with black-bordered markers at the layout's centres.
class ReferenceSheet {
 public:
  ReferenceSheet(ReferenceLayout layout, const MarkerDictionary& dict)
      : layout_(std::move(layout)), dict_(&dict), size_mm_(layout_.sheet_size_mm()) {
    if (layout_.marker_centers_mm.empty()) {
      throw invalid_input_error("layout has no marker centres; cannot render a sheet");
    }
  }

  const ReferenceLayout& layout() const noexcept { return layout_; }
  Point2d size_mm() const noexcept { return size_mm_; }

  /// Intensity at a sheet point in mm, or empty outside the paper.
  std::optional<double> intensity(Point2d mm) const {
    if (mm.x < 0 || mm.y < 0 || mm.x >= size_mm_.x || mm.y >= size_mm_.y) return std::nullopt;
    const int n = dict_->grid_size();
    const double side = layout_.marker_side_mm;
    for (const auto& [id, c] : layout_.marker_centers_mm) {
      const double lx = mm.x - (c.x - side / 2);
      const double ly = mm.y - (c.y - side / 2);
      if (lx < 0 || ly < 0 || lx >= side || ly >= side) continue;
      const int mx = static_cast<int>(lx / side * (n + 2));
      const int my = static_cast<int>(ly / side * (n + 2));
      const bool interior = mx > 0 && my > 0 && mx <= n && my <= n;
      return interior && code_bit(dict_->code(id), n, my - 1, mx - 1) ? 255.0 : 0.0;
    }
    return 255.0;
  }

  /// Marker corners in sheet mm, clockwise from the canonical top-left.
  std::array<Point2d, 4> marker_corners_mm(int id) const {
    const auto& c = layout_.marker_centers_mm.at(id);
    const double h = layout_.marker_side_mm / 2;
    return {Point2d{c.x - h, c.y - h}, Point2d{c.x + h, c.y - h}, Point2d{c.x + h, c.y + h},
            Point2d{c.x - h, c.y + h}};
  }

 private:
  ReferenceLayout layout_;
  const MarkerDictionary* dict_;
  Point2d size_mm_;
};

/// Scene: skin-coloured background, reference sheet placed by a mm -> px homography, and
/// darker wound ellipses. Pixel centres sit at integer coordinates.
struct SceneSpec {
  int width = 640;
  int height = 480;
  Homography sheet_to_image;
  std::vector<Ellipse> wounds;
  std::vector<int> hidden_markers;  ///< ids painted over with skin
  Rgb skin{205, 160, 140};
  Rgb wound{140, 50, 50};
  int supersample = 4;
};

inline RgbImage render_scene(const SceneSpec& spec, const ReferenceSheet& sheet) {
  const auto to_sheet = spec.sheet_to_image.inverse();
  if (!to_sheet) throw invalid_input_error("scene homography is singular");
  std::vector<std::array<Point2d, 4>> hidden;
  for (int id : spec.hidden_markers) hidden.push_back(sheet.marker_corners_mm(id));
  auto in_hidden = [&](Point2d mm) {
    const double pad = sheet.layout().margin_mm / 2;
    for (const auto& q : hidden) {
      if (mm.x >= q[0].x - pad && mm.x <= q[2].x + pad && mm.y >= q[0].y - pad &&
          mm.y <= q[2].y + pad) {
        return true;
      }
    }
    return false;
  };

  RgbImage out(spec.width, spec.height);
  const int ss = std::max(1, spec.supersample);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double r = 0, g = 0, b = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const Point2d p{x - 0.5 + (sx + 0.5) / ss, y - 0.5 + (sy + 0.5) / ss};
          Rgb c = spec.skin;
          bool wound = false;
          for (const auto& e : spec.wounds) wound = wound || e.contains(p);
          if (wound) {
            c = spec.wound;
          } else {
            const Point2d mm = (*to_sheet)(p);
            if (auto v = sheet.intensity(mm); v && !in_hidden(mm)) {
              const auto u = static_cast<std::uint8_t>(*v);
              c = {u, u, u};
            }
          }
          r += c.r;
          g += c.g;
          b += c.b;
        }
      }
      const double n = ss * ss;
      out(x, y) = {static_cast<std::uint8_t>(std::lround(r / n)),
                   static_cast<std::uint8_t>(std::lround(g / n)),
                   static_cast<std::uint8_t>(std::lround(b / n))};
    }
  }
  return out;
}

/// True marker corners in image pixels for a scene.
inline std::array<Point2d, 4> scene_marker_corners(const SceneSpec& spec, const ReferenceSheet& sheet,
                                                   int id) {
  auto c = sheet.marker_corners_mm(id);
  for (auto& p : c) p = spec.sheet_to_image(p);
  return c;
}

/// Print-ready sheet raster at a given resolution.
inline GrayImage render_sheet(const ReferenceSheet& sheet, double px_per_mm) {
  const auto size = sheet.size_mm();
  const int w = static_cast<int>(std::lround(size.x * px_per_mm));
  const int h = static_cast<int>(std::lround(size.y * px_per_mm));
  GrayImage out(w, h, 255);
  const int ss = 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const Point2d mm{(x + (sx + 0.5) / ss) / px_per_mm, (y + (sy + 0.5) / ss) / px_per_mm};
          acc += sheet.intensity(mm).value_or(255.0);
        }
      }
      out(x, y) = static_cast<std::uint8_t>(std::lround(acc / (ss * ss)));
    }
  }
  return out;
}

/// Standard test scene: the default sheet at `px_per_mm`, rotated by `angle_rad`, on the
/// left of the canvas, with one wound ellipse to its right.
inline SceneSpec standard_scene(double px_per_mm, double angle_rad, const Ellipse& wound_px,
                                const ReferenceSheet& sheet) {
  const auto size = sheet.size_mm();
  SceneSpec spec;
  const double diag = std::hypot(size.x, size.y) * px_per_mm;
  const double margin = 12.0;
  const Point2d sheet_center{margin + diag / 2, margin + diag / 2};
  const Point2d mid_mm = size / 2.0;
  // translation so that the sheet centre lands on sheet_center
  const double c = std::cos(angle_rad) * px_per_mm, s = std::sin(angle_rad) * px_per_mm;
  const Point2d t{sheet_center.x - (c * mid_mm.x - s * mid_mm.y),
                  sheet_center.y - (s * mid_mm.x + c * mid_mm.y)};
  spec.sheet_to_image = Homography::similarity(px_per_mm, angle_rad, t);
  Ellipse w = wound_px;
  const double reach = std::max(w.semi_major, w.semi_minor);
  w.center = {margin * 2 + diag + reach, std::max(margin + diag / 2, reach + margin)};
  spec.wounds = {w};
  spec.width = static_cast<int>(std::ceil(w.center.x + reach + margin * 2));
  spec.height = static_cast<int>(std::ceil(std::max(diag + margin * 2, w.center.y + reach + margin * 2)));
  return spec;
}

}  // namespace woundambit
