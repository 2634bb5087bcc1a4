#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace woundambit {

struct Point2i {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point2i&, const Point2i&) = default;
  friend auto operator<=>(const Point2i&, const Point2i&) = default;
};

struct Point2d {
  double x = 0.0;
  double y = 0.0;

  Point2d() = default;
  constexpr Point2d(double x_, double y_) : x(x_), y(y_) {}
  constexpr explicit Point2d(Point2i p) : x(p.x), y(p.y) {}

  friend constexpr Point2d operator+(Point2d a, Point2d b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2d operator-(Point2d a, Point2d b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2d operator*(Point2d a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point2d operator*(double s, Point2d a) { return {a.x * s, a.y * s}; }
  friend constexpr Point2d operator/(Point2d a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Point2d&, const Point2d&) = default;
};

constexpr double dot(Point2d a, Point2d b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2d a, Point2d b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2d a) { return std::hypot(a.x, a.y); }
inline double distance(Point2d a, Point2d b) { return norm(a - b); }

constexpr std::int64_t squared_distance(Point2i a, Point2i b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

constexpr std::int64_t cross(Point2i o, Point2i a, Point2i b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) -
         static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

/// Twice the signed polygon area on raw coordinates. Positive means clockwise on screen
/// when y points down.
template <typename P>
double signed_area2(std::span<const P> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    s += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
  }
  return s;
}

/// Strictly convex hull (collinear points dropped), counterclockwise in raw coordinates.
inline std::vector<Point2i> convex_hull(std::vector<Point2i> pts) {
  std::ranges::sort(pts);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2i> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    const auto& p = pts[i - 1];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

inline bool is_convex(std::span<const Point2d> poly) {
  if (poly.size() < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto a = poly[i];
    const auto b = poly[(i + 1) % poly.size()];
    const auto c = poly[(i + 2) % poly.size()];
    const double z = cross(b - a, c - b);
    if (std::abs(z) < 1e-12) return false;
    const int s = z > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

inline double perimeter(std::span<const Point2i> closed) {
  double p = 0.0;
  for (std::size_t i = 0; i < closed.size(); ++i) {
    p += distance(Point2d(closed[i]), Point2d(closed[(i + 1) % closed.size()]));
  }
  return p;
}

namespace detail {

inline double point_segment_distance(Point2d p, Point2d a, Point2d b) {
  const Point2d ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

inline void douglas_peucker(std::span<const Point2i> pts, std::size_t first, std::size_t last,
                            double epsilon, std::vector<std::size_t>& keep) {
  if (last <= first + 1) return;
  double best = -1.0;
  std::size_t best_i = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = point_segment_distance(Point2d(pts[i]), Point2d(pts[first]),
                                            Point2d(pts[last]));
    if (d > best) {
      best = d;
      best_i = i;
    }
  }
  if (best > epsilon) {
    douglas_peucker(pts, first, best_i, epsilon, keep);
    keep.push_back(best_i);
    douglas_peucker(pts, best_i, last, epsilon, keep);
  }
}

}  // namespace detail

/// Douglas-Peucker simplification of a closed polyline. The curve is split at the point
/// farthest from the first point and each half is simplified independently.
inline std::vector<Point2i> approximate_closed_polygon(std::span<const Point2i> closed,
                                                       double epsilon) {
  if (closed.size() < 3) return {closed.begin(), closed.end()};
  std::size_t far = 0;
  std::int64_t far_d = -1;
  for (std::size_t i = 1; i < closed.size(); ++i) {
    const auto d = squared_distance(closed[0], closed[i]);
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  std::vector<Point2i> ring(closed.begin(), closed.end());
  ring.push_back(closed[0]);
  std::vector<std::size_t> keep{0};
  detail::douglas_peucker(ring, 0, far, epsilon, keep);
  keep.push_back(far);
  detail::douglas_peucker(ring, far, ring.size() - 1, epsilon, keep);
  std::vector<Point2i> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(ring[i]);
  return out;
}

/// Projective map x' = H x on homogeneous 2-D points.
class Homography {
 public:
  Homography() : h_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
  explicit Homography(const std::array<double, 9>& h) : h_(h) {}

  /// Exact solution mapping src[i] to dst[i]; empty when the configuration is degenerate.
  static std::optional<Homography> from_points(std::span<const Point2d, 4> src,
                                               std::span<const Point2d, 4> dst) {
    // 8x9 augmented system with h22 fixed to 1.
    std::array<std::array<double, 9>, 8> a{};
    for (int i = 0; i < 4; ++i) {
      const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
      a[2 * i] = {x, y, 1, 0, 0, 0, -u * x, -u * y, u};
      a[2 * i + 1] = {0, 0, 0, x, y, 1, -v * x, -v * y, v};
    }
    for (int col = 0; col < 8; ++col) {
      int pivot = col;
      for (int r = col + 1; r < 8; ++r) {
        if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
      }
      if (std::abs(a[pivot][col]) < 1e-12) return std::nullopt;
      std::swap(a[col], a[pivot]);
      for (int r = 0; r < 8; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
      }
    }
    std::array<double, 9> h{};
    for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
    h[8] = 1.0;
    return Homography(h);
  }

  static Homography similarity(double scale, double angle_rad, Point2d translation) {
    const double c = std::cos(angle_rad) * scale;
    const double s = std::sin(angle_rad) * scale;
    return Homography({c, -s, translation.x, s, c, translation.y, 0, 0, 1});
  }

  Point2d operator()(Point2d p) const {
    const double w = h_[6] * p.x + h_[7] * p.y + h_[8];
    return {(h_[0] * p.x + h_[1] * p.y + h_[2]) / w, (h_[3] * p.x + h_[4] * p.y + h_[5]) / w};
  }

  Homography operator*(const Homography& o) const {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[3 * i + j] += h_[3 * i + k] * o.h_[3 * k + j];
    return Homography(r);
  }

  std::optional<Homography> inverse() const {
    const auto& m = h_;
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (std::abs(det) < 1e-15) return std::nullopt;
    std::array<double, 9> r{
        m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
        m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
        m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
    for (auto& v : r) v /= det;
    return Homography(r);
  }

  const std::array<double, 9>& coefficients() const noexcept { return h_; }

 private:
  std::array<double, 9> h_;
};

}  // namespace woundambit
