#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "woundambit/calibration.hpp"
#include "woundambit/contour.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/mask.hpp"

namespace woundambit {

/// Contours with fewer points are not measured for height and width.
inline constexpr std::size_t kMinContourPoints = 7;

struct Diagonal {
  Point2i a;  ///< lexicographically smaller endpoint
  Point2i b;
  double length_px = 0.0;
};

struct WidthSegment {
  Point2d a;
  Point2d b;
  double length_px = 0.0;
};

/// Farthest pair of contour points. The farthest pair of a point set is always a pair of
/// convex hull vertices, so only those are compared. Among equally distant pairs the
/// lexicographically smallest (a, b), with a < b, wins. Empty for contours below
/// kMinContourPoints.
inline std::optional<Diagonal> longest_diagonal(const Contour& contour) {
  if (contour.size() < kMinContourPoints) return std::nullopt;
  const auto hull = convex_hull(contour.points);
  if (hull.size() < 2) return std::nullopt;
  std::int64_t best = -1;
  Point2i ba, bb;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      Point2i a = hull[i], b = hull[j];
      if (b < a) std::swap(a, b);
      const auto d = squared_distance(a, b);
      if (d > best || (d == best && std::pair(a, b) < std::pair(ba, bb))) {
        best = d;
        ba = a;
        bb = b;
      }
    }
  }
  return Diagonal{ba, bb, std::sqrt(static_cast<double>(best))};
}

inline constexpr double kOnLineTol = 1e-9;

/// Sweeps the infinite perpendicular of the diagonal in `step_px` increments centred on the
/// diagonal's midpoint, plus both ends, and keeps the widest pair of intersections
/// with the closed contour polyline. Zero width, with both endpoints at the diagonal's
/// midpoint, when no position produces two separated intersections.
inline WidthSegment perpendicular_width(const Contour& contour, Point2d diag_a, Point2d diag_b,
                                        double step_px = 1.0) {
  const double len = distance(diag_a, diag_b);
  if (!(len > 0)) throw invalid_input_error("diagonal must have positive length");
  if (!(step_px > 0)) throw invalid_input_error("sweep step must be positive");
  const Point2d u = (diag_b - diag_a) / len;
  const Point2d n{-u.y, u.x};
  const Point2d mid = (diag_a + diag_b) / 2.0;

  // Contour in diagonal coordinates: t along u (from diag_a), s along n.
  std::vector<Point2d> ts;
  ts.reserve(contour.size());
  for (const auto& p : contour.points) {
    const Point2d d = Point2d(p) - diag_a;
    ts.push_back({dot(d, u), dot(d, n)});
  }

  WidthSegment best{mid, mid, 0.0};
  // Positions step outwards from the midpoint, so reversing the diagonal samples the same
  // perpendiculars.
  const double half = len / 2.0;
  const auto steps = static_cast<long>(std::floor(half / step_px - 1e-9));
  std::vector<double> positions{0.0};
  for (long k = -steps; k <= steps; ++k) positions.push_back(half + k * step_px);
  positions.push_back(len);

  for (double t : positions) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t m = ts.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point2d p = ts[i];
      const Point2d q = ts[(i + 1) % m];
      // Vertices within rounding distance of the perpendicular count as on it; otherwise
      // a contour tip can drop out when t and the projection round differently.
      auto side = [&](double v) { return std::abs(v - t) <= kOnLineTol ? 0.0 : v - t; };
      const double dp = side(p.x), dq = side(q.x);
      if (dp == 0) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
      }
      if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
        const double s = p.y + (q.y - p.y) * (dp / (dp - dq));
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    if (hi > lo && hi - lo > best.length_px) {
      best = {diag_a + u * t + n * lo, diag_a + u * t + n * hi, hi - lo};
    }
  }
  return best;
}

struct WoundMeasurement {
  int contour_index = 0;
  std::size_t area_px = 0;
  double area_mm2 = 0.0;
  double height_mm = 0.0;
  double width_mm = 0.0;
  std::array<Point2d, 2> height_endpoints{};
  std::array<Point2d, 2> width_endpoints{};
  double px_per_mm = 0.0;
};

struct MeasurementSet {
  std::vector<WoundMeasurement> wounds;  ///< sorted by area, largest first
  double total_area_mm2 = 0.0;           ///< every foreground pixel, measured or not
  std::vector<Contour> contours;         ///< all outer contours, by component label
};

inline MeasurementSet measure_wounds(const BinaryMask& mask, double px_per_mm,
                                     double step_px = 1.0) {
  if (!(px_per_mm > 0)) throw invalid_input_error("px_per_mm must be positive");
  const auto cc = connected_components(mask);
  const auto areas = cc.areas();
  MeasurementSet out;
  out.contours = extract_contours(cc);
  const double ppm2 = px_per_mm * px_per_mm;
  out.total_area_mm2 = static_cast<double>(area_px(mask)) / ppm2;
  for (std::size_t i = 0; i < out.contours.size(); ++i) {
    const auto& contour = out.contours[i];
    const auto diag = longest_diagonal(contour);
    if (!diag) continue;
    const auto width = perpendicular_width(contour, Point2d(diag->a), Point2d(diag->b), step_px);
    WoundMeasurement w;
    w.contour_index = static_cast<int>(i);
    w.area_px = areas[i];
    w.area_mm2 = static_cast<double>(areas[i]) / ppm2;
    w.height_mm = diag->length_px / px_per_mm;
    w.width_mm = width.length_px / px_per_mm;
    w.height_endpoints = {Point2d(diag->a), Point2d(diag->b)};
    w.width_endpoints = {width.a, width.b};
    w.px_per_mm = px_per_mm;
    out.wounds.push_back(w);
  }
  std::ranges::stable_sort(out.wounds, std::greater<>{}, &WoundMeasurement::area_px);
  return out;
}

inline MeasurementSet measure_wounds(const BinaryMask& mask, const ScaleEstimate& scale,
                                     double step_px = 1.0) {
  return measure_wounds(mask, scale.px_per_mm, step_px);
}

}  // namespace woundambit
