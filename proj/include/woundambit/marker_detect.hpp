#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "woundambit/contour.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/marker_dictionary.hpp"
#include "woundambit/raster.hpp"

namespace woundambit {

/// Decoded fiducial. Corners run clockwise on screen starting at the marker's canonical
/// top-left, in continuous image coordinates (pixel centres at integer positions).
struct MarkerDetection {
  int id = -1;
  std::array<Point2d, 4> corners{};
  /// Quarter turns (clockwise on screen) between the canonical pattern and the image.
  int decode_rotation = 0;
  int bit_errors = 0;

  Point2d center() const {
    Point2d c{0, 0};
    for (const auto& p : corners) c = c + p;
    return c / 4.0;
  }

  double area() const { return std::abs(signed_area2(std::span<const Point2d>(corners))) / 2.0; }
};

struct DetectionParams {
  std::vector<int> window_sizes{15, 25, 35};  ///< adaptive-threshold windows, px
  double threshold_offset = 7.0;              ///< dark iff intensity <= local mean - offset
  double approx_epsilon = 0.03;               ///< polygon fit tolerance, fraction of perimeter
  double min_side_px = 10.0;                  ///< shortest admissible quad side
  int border_margin_px = 2;                   ///< quads closer to the image edge are dropped
  int module_px = 8;                          ///< module size in the unwarped canonical square
  int cell_samples = 6;                       ///< central samples per module side
  int max_bit_errors = 1;
  double min_contrast = 20.0;  ///< required gap between dark and light class means
  bool refine_corners = true;
  int refine_half_window = 2;  ///< 5x5 refinement window
  int refine_iterations = 20;
};

/// Module colours of a (grid_size + 2)^2 sample, row-major, 1 = white.
struct GridSample {
  int size = 0;
  std::vector<std::uint8_t> cells;

  bool white(int row, int col) const { return cells[static_cast<std::size_t>(row * size + col)]; }
};

struct DecodeResult {
  int id = -1;
  int rotation = 0;
  int bit_errors = 0;
};

/// Matches a sampled grid against the dictionary. Any white border cell rejects the sample.
/// The best (entry, rotation) must be within `max_bit_errors` and strictly unique.
inline std::optional<DecodeResult> decode_grid(const GridSample& sample,
                                               const MarkerDictionary& dict,
                                               int max_bit_errors) {
  const int n = dict.grid_size();
  if (sample.size != n + 2 || sample.cells.size() != static_cast<std::size_t>(sample.size * sample.size)) {
    return std::nullopt;
  }
  for (int i = 0; i < sample.size; ++i) {
    if (sample.white(0, i) || sample.white(n + 1, i) || sample.white(i, 0) ||
        sample.white(i, n + 1)) {
      return std::nullopt;
    }
  }
  MarkerCode observed = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (sample.white(r + 1, c + 1)) observed |= MarkerCode{1} << (r * n + c);
    }
  }
  int best = n * n + 1;
  int ties = 0;
  DecodeResult result;
  for (int id = 0; id < dict.size(); ++id) {
    for (int rot = 0; rot < 4; ++rot) {
      const int d = hamming(observed, rotate_code_cw(dict.code(id), n, rot));
      if (d < best) {
        best = d;
        ties = 1;
        result = {id, rot, d};
      } else if (d == best) {
        ++ties;
      }
    }
  }
  if (best > max_bit_errors || ties != 1) return std::nullopt;
  return result;
}

/// Marker raster without margin: one black border module around the bit grid.
inline GrayImage render_marker(int id, const MarkerDictionary& dict, int side_px) {
  const int n = dict.grid_size();
  const MarkerCode code = dict.code(id);
  if (side_px < n + 2) {
    throw invalid_input_error("marker side must be at least " + std::to_string(n + 2) + " px");
  }
  GrayImage out(side_px, side_px, 0);
  const int modules = n + 2;
  for (int y = 0; y < side_px; ++y) {
    const int my = static_cast<int>((y + 0.5) * modules / side_px);
    for (int x = 0; x < side_px; ++x) {
      const int mx = static_cast<int>((x + 0.5) * modules / side_px);
      const bool interior = mx > 0 && my > 0 && mx <= n && my <= n;
      if (interior && code_bit(code, n, my - 1, mx - 1)) out(x, y) = 255;
    }
  }
  return out;
}

namespace detail {

/// Dark-pixel map from a local-mean threshold over a w x w window (clipped at borders).
inline BinaryMask adaptive_threshold_dark(const GrayImage& img, int window, double offset) {
  const int w = img.width();
  const int h = img.height();
  std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto at = [&](int x, int y) -> std::int64_t& {
    return integral[static_cast<std::size_t>(y) * (w + 1) + x];
  };
  for (int y = 0; y < h; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += img(x, y);
      at(x + 1, y + 1) = at(x + 1, y) + row;
    }
  }
  const int r = window / 2;
  BinaryMask dark(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      const double sum = static_cast<double>(at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0));
      const double mean = sum / ((x1 - x0) * (y1 - y0));
      dark.set(x, y, img(x, y) <= mean - offset);
    }
  }
  return dark;
}

inline double sample_bilinear(const GrayImage& img, Point2d p) {
  const double x = std::clamp(p.x, 0.0, img.width() - 1.0);
  const double y = std::clamp(p.y, 0.0, img.height() - 1.0);
  const int x0 = std::min(static_cast<int>(x), img.width() - 1);
  const int y0 = std::min(static_cast<int>(y), img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = img(x0, y0) * (1 - fx) + img(x1, y0) * fx;
  const double bottom = img(x0, y1) * (1 - fx) + img(x1, y1) * fx;
  return top * (1 - fy) + bottom * fy;
}

/// Otsu threshold over 8-bit-ish samples; also reports the class-mean gap.
inline std::pair<double, double> otsu(std::span<const double> samples) {
  std::array<double, 256> hist{};
  for (double s : samples) hist[static_cast<std::size_t>(std::clamp(s, 0.0, 255.0) + 0.5) % 256] += 1;
  const double total = static_cast<double>(samples.size());
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double w0 = 0, sum0 = 0, best_var = -1, best_t = 127.5, gap = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best_t = t + 0.5;
      gap = m1 - m0;
    }
  }
  return {best_t, gap};
}

/// Gradient-based corner refinement: solves for the point orthogonal to the intensity
/// gradient at every pixel of a small window around the estimate.
inline Point2d refine_corner(const GrayImage& img, Point2d initial, int half, int iterations) {
  Point2d q = initial;
  for (int it = 0; it < iterations; ++it) {
    const int cx = static_cast<int>(std::lround(q.x));
    const int cy = static_cast<int>(std::lround(q.y));
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx) {
        const int x = cx + dx, y = cy + dy;
        if (x < 1 || y < 1 || x >= img.width() - 1 || y >= img.height() - 1) continue;
        const double gx = (img(x + 1, y) - img(x - 1, y)) * 0.5;
        const double gy = (img(x, y + 1) - img(x, y - 1)) * 0.5;
        const double gxx = gx * gx, gxy = gx * gy, gyy = gy * gy;
        const double wgt = std::exp(-(dx * dx + dy * dy) / (2.0 * half * half));
        a11 += wgt * gxx;
        a12 += wgt * gxy;
        a22 += wgt * gyy;
        b1 += wgt * (gxx * x + gxy * y);
        b2 += wgt * (gxy * x + gyy * y);
      }
    }
    const double det = a11 * a22 - a12 * a12;
    if (std::abs(det) < 1e-9 * (a11 + a22) * (a11 + a22) || det == 0) break;
    const Point2d next{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
    if (distance(next, initial) > half + 1.0) break;
    const double shift = distance(next, q);
    q = next;
    if (shift < 0.005) break;
  }
  return q;
}

inline std::optional<GridSample> sample_grid(const GrayImage& img, const std::array<Point2d, 4>& quad,
                                             int grid_size, const DetectionParams& params) {
  const int modules = grid_size + 2;
  const double side = static_cast<double>(modules * params.module_px);
  const std::array<Point2d, 4> canon{Point2d{0, 0}, Point2d{side, 0}, Point2d{side, side},
                                     Point2d{0, side}};
  auto h = Homography::from_points(canon, quad);
  if (!h) return std::nullopt;
  const int cs = std::clamp(params.cell_samples, 1, params.module_px);
  const double inset = (params.module_px - cs) / 2.0;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(modules * modules * cs * cs));
  for (int my = 0; my < modules; ++my) {
    for (int mx = 0; mx < modules; ++mx) {
      for (int sy = 0; sy < cs; ++sy) {
        for (int sx = 0; sx < cs; ++sx) {
          const Point2d c{mx * params.module_px + inset + sx + 0.5,
                          my * params.module_px + inset + sy + 0.5};
          values.push_back(sample_bilinear(img, (*h)(c)));
        }
      }
    }
  }
  const auto [threshold, gap] = otsu(values);
  if (gap < params.min_contrast) return std::nullopt;
  GridSample grid{modules, std::vector<std::uint8_t>(static_cast<std::size_t>(modules * modules))};
  const std::size_t per_cell = static_cast<std::size_t>(cs * cs);
  for (std::size_t cell = 0; cell < grid.cells.size(); ++cell) {
    std::size_t white = 0;
    for (std::size_t k = 0; k < per_cell; ++k) white += values[cell * per_cell + k] > threshold;
    grid.cells[cell] = 2 * white > per_cell ? 1 : 0;
  }
  return grid;
}

/// Quad candidates from one threshold map: four-vertex convex approximations, clockwise on
/// screen, starting at the vertex nearest the image's top-left.
inline std::vector<std::array<Point2d, 4>> find_quads(const BinaryMask& dark,
                                                      const DetectionParams& params) {
  std::vector<std::array<Point2d, 4>> quads;
  const auto contours = extract_contours(dark);
  const double min_perimeter = 4.0 * params.min_side_px;
  for (const auto& contour : contours) {
    if (static_cast<double>(contour.size()) < min_perimeter * 0.5) continue;
    const double per = perimeter(contour.points);
    if (per < min_perimeter) continue;
    const auto poly = approximate_closed_polygon(contour.points, params.approx_epsilon * per);
    if (poly.size() != 4) continue;
    std::array<Point2d, 4> q{};
    for (int i = 0; i < 4; ++i) q[i] = Point2d(poly[i]);
    if (!is_convex(q)) continue;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
      if (distance(q[i], q[(i + 1) % 4]) < params.min_side_px) ok = false;
      const auto& p = q[i];
      if (p.x < params.border_margin_px || p.y < params.border_margin_px ||
          p.x > dark.width() - 1 - params.border_margin_px ||
          p.y > dark.height() - 1 - params.border_margin_px) {
        ok = false;
      }
    }
    if (!ok) continue;
    if (signed_area2(std::span<const Point2d>(q)) < 0) std::reverse(q.begin(), q.end());
    const auto first = std::ranges::min_element(q, [](Point2d a, Point2d b) {
      const double sa = a.x + a.y, sb = b.x + b.y;
      return sa < sb || (sa == sb && a.y < b.y);
    });
    std::rotate(q.begin(), first, q.end());
    quads.push_back(q);
  }
  return quads;
}

}  // namespace detail

/// Square-fiducial detection: adaptive threshold at several window sizes, outer contours,
/// quad fitting, corner refinement, perspective unwarp, module sampling and dictionary
/// matching. One detection per id (fewest bit errors, then largest area), sorted by id.
inline std::vector<MarkerDetection> detect_markers(const GrayImage& image,
                                                   const MarkerDictionary& dict = builtin_dictionary(),
                                                   const DetectionParams& params = {}) {
  if (image.width() < 32 || image.height() < 32) {
    throw invalid_input_error("marker detection needs an image of at least 32x32");
  }
  std::map<int, MarkerDetection> best;
  for (int window : params.window_sizes) {
    const auto dark = detail::adaptive_threshold_dark(image, window | 1, params.threshold_offset);
    for (auto quad : detail::find_quads(dark, params)) {
      if (params.refine_corners) {
        for (auto& c : quad) {
          c = detail::refine_corner(image, c, params.refine_half_window, params.refine_iterations);
        }
        if (!is_convex(quad)) continue;
      }
      const auto grid = detail::sample_grid(image, quad, dict.grid_size(), params);
      if (!grid) continue;
      const auto decoded = decode_grid(*grid, dict, params.max_bit_errors);
      if (!decoded) continue;
      MarkerDetection det;
      det.id = decoded->id;
      det.decode_rotation = decoded->rotation;
      det.bit_errors = decoded->bit_errors;
      for (int k = 0; k < 4; ++k) det.corners[k] = quad[(k + decoded->rotation) % 4];
      auto it = best.find(det.id);
      if (it == best.end() || det.bit_errors < it->second.bit_errors ||
          (det.bit_errors == it->second.bit_errors && det.area() > it->second.area())) {
        best[det.id] = det;
      }
    }
  }
  std::vector<MarkerDetection> out;
  out.reserve(best.size());
  for (auto& [id, det] : best) out.push_back(det);
  return out;
}

template <typename Pixel>
  requires(!std::is_same_v<Pixel, std::uint8_t>)
std::vector<MarkerDetection> detect_markers(const Raster<Pixel>& image,
                                            const MarkerDictionary& dict = builtin_dictionary(),
                                            const DetectionParams& params = {}) {
  return detect_markers(to_gray(image), dict, params);
}

}  // namespace woundambit
