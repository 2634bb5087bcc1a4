#pragma once

// Test helpers and brute-force oracles. Oracles deliberately avoid the library's own
// algorithms: union-find instead of flood fill, all-pairs instead of hulls, Cramer's rule
// instead of signed distances, textbook DCT sums instead of matrix products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "woundambit/woundambit.hpp"

namespace testsupport {

using namespace woundambit;

/// Random mask with foreground probability `p`.
inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double p = 0.5) {
  std::bernoulli_distribution fg(p);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, fg(rng));
  }
  return m;
}

inline BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.set(x, y, rows[y][x] == '#');
  }
  return m;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("woundambit-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

namespace oracle {

/// Union-find over 8-neighbour foreground pairs. Returns a root per pixel, -1 for
/// background.
inline std::vector<int> component_roots(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> parent(static_cast<std::size_t>(w) * h);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (m.test(x + dx, y + dy)) {
            const int a = find(y * w + x), b = find((y + dy) * w + x + dx);
            if (a != b) parent[a] = b;
          }
        }
      }
    }
  }
  std::vector<int> out(parent.size(), -1);
  for (int i = 0; i < static_cast<int>(out.size()); ++i) {
    if (m.at(i % w, i / w)) out[i] = find(i);
  }
  return out;
}

inline int count_components(const BinaryMask& m) {
  auto roots = component_roots(m);
  std::erase(roots, -1);
  std::ranges::sort(roots);
  return static_cast<int>(std::unique(roots.begin(), roots.end()) - roots.begin());
}

inline bool is_boundary_pixel(const BinaryMask& m, int x, int y) {
  if (!m.test(x, y)) return false;
  const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (auto [dx, dy] : d) {
    if (!m.test(x + dx, y + dy)) return true;
  }
  return false;
}

inline std::size_t pixel_sum(const BinaryMask& m) {
  std::size_t n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) n += m.at(x, y) ? 1 : 0;
  }
  return n;
}

struct PairResult {
  Point2i a, b;
  std::int64_t d2 = -1;
};

/// All-pairs farthest points with the lexicographic (a, b), a < b, tie-break.
inline PairResult farthest_pair(const std::vector<Point2i>& pts) {
  PairResult best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      Point2i a = pts[i], b = pts[j];
      if (!(a < b)) continue;
      const std::int64_t dx = a.x - b.x, dy = a.y - b.y;
      const std::int64_t d2 = dx * dx + dy * dy;
      if (d2 > best.d2 || (d2 == best.d2 && std::pair(a, b) < std::pair(best.a, best.b))) {
        best = {a, b, d2};
      }
    }
  }
  return best;
}

/// Widest perpendicular chord: sweep positions at `step` spacing out from the midpoint of
/// a -> b plus both ends, intersect the perpendicular line with each polygon edge by Cramer's rule.
inline double perpendicular_sweep(const std::vector<Point2i>& poly, Point2d a, Point2d b, double step) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
  const double nx = -uy, ny = ux;
  std::vector<double> ts{0.0, len};
  for (double t = len / 2; t > 0; t -= step) ts.push_back(t);
  for (double t = len / 2 + step; t < len; t += step) ts.push_back(t);
  double best = 0;
  for (double t : ts) {
    const double px = a.x + ux * t, py = a.y + uy * t;
    double lo = 1e300, hi = -1e300;
    bool any = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2i p = poly[i], q = poly[(i + 1) % poly.size()];
      // px + nx s = p.x + (q.x - p.x) r ;  py + ny s = p.y + (q.y - p.y) r
      const double ex = q.x - p.x, ey = q.y - p.y;
      const double det = nx * (-ey) - ny * (-ex);
      const double bx = p.x - px, by = p.y - py;
      if (std::abs(det) < 1e-12) {
        // edge parallel to the line: count its endpoints when they lie on it
        if (std::abs(bx * ux + by * uy) < 1e-9) {
          for (const Point2i e : {p, q}) {
            const double s = (e.x - px) * nx + (e.y - py) * ny;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
            any = true;
          }
        }
        continue;
      }
      const double s = (bx * (-ey) - by * (-ex)) / det;
      const double r = (nx * by - ny * bx) / det;
      if (r < -1e-9 || r > 1 + 1e-9) continue;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      any = true;
    }
    if (any) best = std::max(best, hi - lo);
  }
  return best;
}

inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
  ConfusionCounts c;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const bool p = pred.at(x, y), g = gt.at(x, y);
      if (p && g) ++c.tp;
      if (p && !g) ++c.fp;
      if (!p && g) ++c.fn;
      if (!p && !g) ++c.tn;
    }
  }
  return c;
}

/// Textbook pHash: direct double sums for the DCT, no precomputed matrices.
inline std::uint64_t phash_bits(const GrayImage& img32) {
  const int n = 32;
  auto c = [&](int u, int v) {
    double acc = 0;
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        acc += img32(x, y) * std::cos(M_PI * (2 * y + 1) * u / (2.0 * n)) *
               std::cos(M_PI * (2 * x + 1) * v / (2.0 * n));
      }
    }
    const double au = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    const double av = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    return std::round(au * av * acc * 1e6) / 1e6;
  };
  std::vector<double> vals;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      if (u || v) vals.push_back(c(u, v));
    }
  }
  vals.push_back(c(8, 0));
  auto s = vals;
  std::ranges::sort(s);
  const double med = (s[31] + s[32]) / 2;
  std::uint64_t bits = 0;
  for (int i = 0; i < 64; ++i) {
    if (vals[i] > med) bits |= std::uint64_t{1} << i;
  }
  return bits;
}

}  // namespace oracle
}  // namespace testsupport
