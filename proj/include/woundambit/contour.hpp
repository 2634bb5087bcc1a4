#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "woundambit/geometry.hpp"
#include "woundambit/mask.hpp"

namespace woundambit {

/// Closed outer boundary of one 8-connected component. Consecutive points (and the last
/// and first point) are 8-neighbours; thin parts of a component are traversed in both
/// directions, so a point may appear more than once.
struct Contour {
  std::vector<Point2i> points;
  int label = 0;  ///< component label the boundary belongs to

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace detail {

// Neighbour ring in clockwise order on screen (y down), starting at west.
inline constexpr std::array<Point2i, 8> kRing{{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

inline int ring_index(Point2i d) {
  for (int i = 0; i < 8; ++i) {
    if (kRing[i] == d) return i;
  }
  return -1;
}

/// Moore-neighbour tracing from `start`, which must be the first pixel of its component in
/// raster order (so its west neighbour is outside). Terminates when the tracer is back on
/// `start` and about to repeat its first move.
template <typename InSet>
std::vector<Point2i> moore_trace(Point2i start, InSet&& in_set) {
  struct Step {
    Point2i next;
    Point2i backtrack;
  };
  auto step = [&](Point2i c, int back_dir) -> std::optional<Step> {
    for (int k = 1; k <= 8; ++k) {
      const Point2i d = kRing[(back_dir + k) % 8];
      const Point2i p{c.x + d.x, c.y + d.y};
      if (in_set(p)) {
        const Point2i pd = kRing[(back_dir + k - 1) % 8];
        return Step{p, {c.x + pd.x, c.y + pd.y}};
      }
    }
    return std::nullopt;
  };

  std::vector<Point2i> pts{start};
  auto first = step(start, 0);
  if (!first) return pts;
  const Point2i second = first->next;
  Step cur = *first;
  for (;;) {
    const Point2i c = cur.next;
    const int back_dir = ring_index({cur.backtrack.x - c.x, cur.backtrack.y - c.y});
    auto nxt = step(c, back_dir);
    if (c == start && nxt->next == second) break;
    pts.push_back(c);
    cur = *nxt;
  }
  return pts;
}

}  // namespace detail

/// One outer contour per component, ordered by label. Points run counterclockwise on
/// screen (negative raw shoelace sum) starting at the component's first raster pixel.
/// Interior holes are not traced.
inline std::vector<Contour> extract_contours(const ComponentLabels& cc) {
  const auto& labels = cc.labels;
  std::vector<Contour> out(static_cast<std::size_t>(cc.count));
  std::vector<bool> seen(static_cast<std::size_t>(cc.count), false);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const int l = labels(x, y);
      if (l == 0 || seen[static_cast<std::size_t>(l - 1)]) continue;
      seen[static_cast<std::size_t>(l - 1)] = true;
      auto in_set = [&](Point2i p) { return labels.contains(p.x, p.y) && labels(p.x, p.y) == l; };
      auto pts = detail::moore_trace({x, y}, in_set);
      // The tracer walks clockwise on screen; flip to counterclockwise keeping the start.
      std::reverse(pts.begin() + 1, pts.end());
      out[static_cast<std::size_t>(l - 1)] = Contour{std::move(pts), l};
    }
  }
  return out;
}

inline std::vector<Contour> extract_contours(const BinaryMask& mask) {
  return extract_contours(connected_components(mask));
}

}  // namespace woundambit
