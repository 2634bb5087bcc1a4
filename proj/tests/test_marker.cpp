#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace woundambit;
using namespace testsupport;

namespace {

const MarkerDictionary& dict() { return builtin_dictionary(); }

GrayImage pad(const GrayImage& img, int margin) {
  GrayImage out(img.width() + 2 * margin, img.height() + 2 * margin, 255);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out(x + margin, y + margin) = img(x, y);
  }
  return out;
}

GridSample exact_grid(int id, int rotation) {
  const int n = dict().grid_size();
  const MarkerCode code = rotate_code_cw(dict().code(id), n, rotation);
  GridSample s{n + 2, std::vector<std::uint8_t>((n + 2) * (n + 2), 0)};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) s.cells[(r + 1) * (n + 2) + c + 1] = code_bit(code, n, r, c);
  }
  return s;
}

/// Corner `k` of a marker drawn at offset `m` with side `s`, in continuous coordinates.
Point2d square_corner(int k, double m, double s) {
  const Point2d tl{m - 0.5, m - 0.5};
  const Point2d offs[4] = {{0, 0}, {s, 0}, {s, s}, {0, s}};
  return tl + offs[k];
}

}  // namespace

TEST(Dictionary, BuiltinIsGeneratorOutput) {
  EXPECT_EQ(generate_dictionary(4, 8, 5), dict().entries());
  EXPECT_EQ(dict().grid_size(), 4);
  EXPECT_EQ(dict().size(), 8);
}

TEST(Dictionary, EntriesDistinctUnderRotation) {
  EXPECT_GE(dict().min_hamming(), 5);
  for (int i = 0; i < dict().size(); ++i) {
    for (int r = 1; r < 4; ++r) {
      EXPECT_NE(dict().code(i), rotate_code_cw(dict().code(i), 4, r));
    }
    for (int j = 0; j < dict().size(); ++j) {
      if (i == j) continue;
      for (int r = 0; r < 4; ++r) EXPECT_NE(dict().code(i), rotate_code_cw(dict().code(j), 4, r));
    }
  }
}

TEST(Dictionary, RotationHasOrderFour) {
  for (auto c : dict().entries()) EXPECT_EQ(rotate_code_cw(c, 4, 4), c);
  // (row 0, col 0) moves to (row 0, col n-1) under one clockwise quarter turn
  EXPECT_EQ(rotate_code_cw(MarkerCode{1}, 4), MarkerCode{1} << 3);
}

TEST(Dictionary, UnknownIdThrows) {
  EXPECT_THROW(dict().code(8), invalid_input_error);
  EXPECT_THROW(render_marker(-1, dict(), 48), invalid_input_error);
}

TEST(DecodeGrid, ExactPatternsForEveryIdAndRotation) {
  for (int id = 0; id < dict().size(); ++id) {
    for (int rot = 0; rot < 4; ++rot) {
      const auto r = decode_grid(exact_grid(id, rot), dict(), 1);
      ASSERT_TRUE(r);
      EXPECT_EQ(r->id, id);
      EXPECT_EQ(r->rotation, rot);
      EXPECT_EQ(r->bit_errors, 0);
    }
  }
}

TEST(DecodeGrid, SingleBitErrorsAreCorrected) {
  for (int id = 0; id < dict().size(); ++id) {
    for (int rot = 0; rot < 4; ++rot) {
      for (int bit = 0; bit < 16; ++bit) {
        auto g = exact_grid(id, rot);
        auto& cell = g.cells[(bit / 4 + 1) * 6 + bit % 4 + 1];
        cell ^= 1;
        const auto r = decode_grid(g, dict(), 1);
        ASSERT_TRUE(r);
        EXPECT_EQ(r->id, id);
        EXPECT_EQ(r->rotation, rot);
        EXPECT_EQ(r->bit_errors, 1);
        EXPECT_FALSE(decode_grid(g, dict(), 0));
      }
    }
  }
}

TEST(DecodeGrid, DoubleBitErrorsNeverDecodeAtLimitOne) {
  for (int id = 0; id < dict().size(); ++id) {
    for (int a = 0; a < 16; ++a) {
      for (int b = a + 1; b < 16; ++b) {
        auto g = exact_grid(id, 0);
        g.cells[(a / 4 + 1) * 6 + a % 4 + 1] ^= 1;
        g.cells[(b / 4 + 1) * 6 + b % 4 + 1] ^= 1;
        ASSERT_FALSE(decode_grid(g, dict(), 1));
      }
    }
  }
}

TEST(DecodeGrid, WhiteBorderRejects) {
  auto g = exact_grid(2, 0);
  for (int i = 0; i < 6; ++i) g.cells[i] = 1;
  EXPECT_FALSE(decode_grid(g, dict(), 1));
  auto h = exact_grid(2, 0);
  h.cells[5 * 6 + 3] = 1;  // one bottom border cell
  EXPECT_FALSE(decode_grid(h, dict(), 1));
}

TEST(RenderMarker, ModuleGridReDecodes) {
  for (int id = 0; id < dict().size(); ++id) {
    const auto img = render_marker(id, dict(), 36);
    GridSample g{6, std::vector<std::uint8_t>(36)};
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) g.cells[r * 6 + c] = img(c * 6 + 3, r * 6 + 3) > 127;
    }
    const auto d = decode_grid(g, dict(), 0);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->id, id);
    EXPECT_EQ(d->rotation, 0);
  }
}

TEST(RenderMarker, TooSmallThrows) { EXPECT_THROW(render_marker(0, dict(), 5), invalid_input_error); }

TEST(DetectMarkers, BlankImageIsEmpty) {
  EXPECT_TRUE(detect_markers(GrayImage(64, 64, 128)).empty());
  EXPECT_TRUE(detect_markers(GrayImage(64, 64, 255)).empty());
}

TEST(DetectMarkers, TinyImageThrows) { EXPECT_THROW(detect_markers(GrayImage(31, 64, 255)), invalid_input_error); }

TEST(DetectMarkers, AxisAlignedCornersWithinHalfPixel) {
  for (int id = 0; id < dict().size(); ++id) {
    const int margin = 20, side = 60;
    const auto img = pad(render_marker(id, dict(), side), margin);
    const auto dets = detect_markers(img);
    ASSERT_EQ(dets.size(), 1u) << "id " << id;
    EXPECT_EQ(dets[0].id, id);
    EXPECT_EQ(dets[0].bit_errors, 0);
    EXPECT_EQ(dets[0].decode_rotation, 0);
    for (int k = 0; k < 4; ++k) {
      EXPECT_LT(distance(dets[0].corners[k], square_corner(k, margin, side)), 0.5);
    }
  }
}

TEST(DetectMarkers, QuarterTurnsChangeRotationOnly) {
  for (int id = 0; id < dict().size(); ++id) {
    const int margin = 16, side = 48;
    auto img = pad(render_marker(id, dict(), side), margin);
    std::array<Point2d, 4> truth;
    for (int k = 0; k < 4; ++k) truth[k] = square_corner(k, margin, side);
    for (int turn = 0; turn < 4; ++turn) {
      const auto dets = detect_markers(img);
      ASSERT_EQ(dets.size(), 1u);
      EXPECT_EQ(dets[0].id, id);
      EXPECT_EQ(dets[0].decode_rotation, turn);
      for (int k = 0; k < 4; ++k) EXPECT_LT(distance(dets[0].corners[k], truth[k]), 0.5);
      // rotate raster and truth together: (x, y) -> (H - 1 - y, x)
      const double h = img.height();
      img = rotate_cw(img);
      for (auto& p : truth) p = {h - 1 - p.y, p.x};
    }
  }
}

TEST(DetectMarkers, PerspectiveSceneReprojection) {
  const ReferenceSheet sheet(ReferenceLayout::default_layout(), dict());
  const auto size = sheet.size_mm();
  // sheet outline pushed into a trapezoid: about 20 degrees of tilt about the vertical axis
  const std::array<Point2d, 4> src{{{0, 0}, {size.x, 0}, {size.x, size.y}, {0, size.y}}};
  const std::array<Point2d, 4> dst{{{40, 30}, {230, 55}, {225, 395}, {45, 430}}};
  SceneSpec spec;
  spec.width = 300;
  spec.height = 460;
  spec.sheet_to_image = *Homography::from_points(src, dst);
  const auto img = render_scene(spec, sheet);
  const auto dets = detect_markers(img);
  ASSERT_EQ(dets.size(), 4u);
  double err = 0;
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(dets[i].id, i);
    const auto truth = scene_marker_corners(spec, sheet, i);
    for (int k = 0; k < 4; ++k) err += distance(dets[i].corners[k], truth[k]);
  }
  EXPECT_LT(err / 16, 1.0);
}

TEST(DetectMarkers, Deterministic) {
  const ReferenceSheet sheet(ReferenceLayout::default_layout(), dict());
  const auto spec = standard_scene(3.0, 0.4, {{0, 0}, 20, 10, 0}, sheet);
  const auto img = to_gray(render_scene(spec, sheet));
  const auto a = detect_markers(img);
  const auto b = detect_markers(img);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(a[i].corners[k].x, b[i].corners[k].x);
      EXPECT_EQ(a[i].corners[k].y, b[i].corners[k].y);
    }
  }
}

TEST(DetectMarkers, NoiseImagesYieldNothing) {
  std::mt19937 rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    GrayImage img(128, 128);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng() & 0xff);
    EXPECT_TRUE(detect_markers(img).empty());
  }
}

TEST(DetectMarkers, SortedByIdWithConvexCorners) {
  const ReferenceSheet sheet(ReferenceLayout::default_layout(), dict());
  const auto spec = standard_scene(4.0, -0.7, {{0, 0}, 20, 10, 0}, sheet);
  const auto dets = detect_markers(render_scene(spec, sheet));
  ASSERT_EQ(dets.size(), 4u);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    EXPECT_EQ(dets[i].id, static_cast<int>(i));
    EXPECT_TRUE(is_convex(dets[i].corners));
  }
}
