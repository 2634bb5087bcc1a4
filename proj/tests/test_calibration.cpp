#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace woundambit;
using namespace testsupport;

namespace {

MarkerDetection square_marker(int id, Point2d tl, double side) {
  MarkerDetection d;
  d.id = id;
  d.corners = {tl, tl + Point2d{side, 0}, tl + Point2d{side, side}, tl + Point2d{0, side}};
  return d;
}

ReferenceLayout two_marker_layout(double mm) {
  ReferenceLayout l;
  l.required_ids = {0, 1};
  l.pair_distances_mm[{0, 1}] = mm;
  return l;
}

std::vector<MarkerDetection> random_detections(std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(0, 500), side(10, 60);
  std::vector<MarkerDetection> out;
  for (int id = 0; id < 4; ++id) {
    if (rng() % 3 == 0 && out.size() < 3) continue;
    out.push_back(square_marker(id, {pos(rng), pos(rng)}, side(rng)));
  }
  if (out.empty()) out.push_back(square_marker(2, {1, 2}, 20));
  return out;
}

}  // namespace

TEST(EstimateScale, SingleMarkerFallback) {
  const std::vector<MarkerDetection> d{square_marker(0, {0, 0}, 24)};
  const auto est = estimate_scale(d, ReferenceLayout::default_layout());
  EXPECT_DOUBLE_EQ(est.px_per_mm, 2.0);
  EXPECT_EQ(est.method, ScaleMethod::single_marker);
  EXPECT_EQ(est.n_markers, 1);
  EXPECT_EQ(est.n_pairs, 0);
}

TEST(EstimateScale, SingleMarkerAveragesOppositeSides) {
  MarkerDetection d;
  d.id = 3;
  d.corners = {Point2d{0, 0}, Point2d{26, 0}, Point2d{26, 22}, Point2d{0, 22}};
  const std::vector<MarkerDetection> v{d};
  // width 26, height 22 -> mean 24 px over 12 mm
  EXPECT_DOUBLE_EQ(estimate_scale(v, ReferenceLayout::default_layout()).px_per_mm, 2.0);
}

TEST(EstimateScale, TwoMarkersOnePair) {
  const std::vector<MarkerDetection> d{square_marker(0, {0, 0}, 10), square_marker(1, {100, 0}, 10)};
  const auto est = estimate_scale(d, two_marker_layout(50));
  EXPECT_DOUBLE_EQ(est.px_per_mm, 2.0);
  EXPECT_EQ(est.n_pairs, 1);
  EXPECT_EQ(est.method, ScaleMethod::pairwise);
}

TEST(EstimateScale, NoUsableMarkerIsNoReference) {
  EXPECT_THROW(estimate_scale({}, ReferenceLayout::default_layout()), no_reference_error);
  const std::vector<MarkerDetection> foreign{square_marker(7, {0, 0}, 10)};
  EXPECT_THROW(estimate_scale(foreign, ReferenceLayout::default_layout()), no_reference_error);
}

TEST(EstimateScale, ForeignIdsIgnored) {
  const std::vector<MarkerDetection> d{square_marker(0, {0, 0}, 10), square_marker(6, {300, 0}, 10),
                                       square_marker(1, {100, 0}, 10)};
  const auto est = estimate_scale(d, two_marker_layout(50));
  EXPECT_EQ(est.n_markers, 2);
  EXPECT_DOUBLE_EQ(est.px_per_mm, 2.0);
}

TEST(EstimateScale, MeanOfPairRatios) {
  std::mt19937 rng(1);
  const auto layout = ReferenceLayout::default_layout();
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = random_detections(rng);
    const auto est = estimate_scale(d, layout);
    EXPECT_EQ(est.method == ScaleMethod::single_marker, est.n_markers == 1);
    if (est.method == ScaleMethod::single_marker) {
      EXPECT_EQ(est.n_pairs, 0);
      continue;
    }
    double sum = 0;
    for (const auto& p : est.per_pair_ratios) {
      EXPECT_LT(p.id_a, p.id_b);
      sum += p.ratio;
    }
    EXPECT_NEAR(est.px_per_mm, sum / est.n_pairs, 1e-12);
    EXPECT_EQ(est.n_pairs, est.n_markers * (est.n_markers - 1) / 2);
  }
}

TEST(EstimateScale, ScaleEquivariance) {
  std::mt19937 rng(2);
  const auto layout = ReferenceLayout::default_layout();
  for (int trial = 0; trial < 200; ++trial) {
    auto d = random_detections(rng);
    const double k = 0.25 + (rng() % 1000) / 250.0;
    const auto base = estimate_scale(d, layout);
    for (auto& m : d) {
      for (auto& c : m.corners) c = c * k;
    }
    EXPECT_NEAR(estimate_scale(d, layout).px_per_mm, k * base.px_per_mm, 1e-12 * k * base.px_per_mm);
  }
}

TEST(EstimateScale, OrderInvariance) {
  std::mt19937 rng(3);
  const auto layout = ReferenceLayout::default_layout();
  for (int trial = 0; trial < 200; ++trial) {
    auto d = random_detections(rng);
    const auto base = estimate_scale(d, layout).px_per_mm;
    std::shuffle(d.begin(), d.end(), rng);
    EXPECT_EQ(estimate_scale(d, layout).px_per_mm, base);
  }
}

TEST(EstimateScale, RenderedSceneWithinTwoPercent) {
  const ReferenceSheet sheet(ReferenceLayout::default_layout(), builtin_dictionary());
  const auto spec = standard_scene(4.0, 0.25, {{0, 0}, 30, 12, 0}, sheet);
  const auto dets = detect_markers(render_scene(spec, sheet));
  const auto est = estimate_scale(dets, sheet.layout());
  EXPECT_EQ(est.n_pairs, 6);
  EXPECT_NEAR(est.px_per_mm, 4.0, 0.08);
  for (int hidden = 0; hidden < 4; ++hidden) {
    std::vector<MarkerDetection> rest;
    for (const auto& m : dets) {
      if (m.id != hidden) rest.push_back(m);
    }
    const auto partial = estimate_scale(rest, sheet.layout());
    EXPECT_EQ(partial.n_pairs, 3);
    EXPECT_LT(std::abs(partial.px_per_mm - est.px_per_mm) / est.px_per_mm, 0.02);
  }
}

TEST(Coplanarity, Examples) {
  const std::vector<double> same{2.0, 2.0, 2.0};
  EXPECT_TRUE(coplanarity_check(same).ok);
  const std::vector<double> spread{2.0, 2.6};
  const auto c = coplanarity_check(spread);
  EXPECT_FALSE(c.ok);
  EXPECT_NEAR(c.dispersion, 0.6 / 2.3, 1e-12);
  EXPECT_FALSE(c.message.empty());
  const std::vector<double> single{3.0};
  EXPECT_TRUE(coplanarity_check(single).ok);
}

TEST(Coplanarity, ThresholdIsExclusive) {
  const std::vector<double> at{1.0, 1.15};  // median 1.075: dispersion below 0.15
  EXPECT_TRUE(coplanarity_check(at).ok);
  const std::vector<double> edge{1.0, 1.0, 1.15};  // median 1.0: dispersion 0.15 exactly
  EXPECT_TRUE(coplanarity_check(edge).ok);
  const std::vector<double> over{1.0, 1.0, 1.1501};
  EXPECT_FALSE(coplanarity_check(over).ok);
}

TEST(Layout, DefaultGeometry) {
  const auto l = ReferenceLayout::default_layout();
  EXPECT_EQ(l.marker_side_mm, 12.0);
  EXPECT_EQ(l.margin_mm, 4.0);
  EXPECT_EQ(l.required_ids, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_DOUBLE_EQ(*l.distance_mm(0, 1), 30.0);
  EXPECT_DOUBLE_EQ(*l.distance_mm(3, 2), 30.0);
  EXPECT_DOUBLE_EQ(*l.distance_mm(0, 2), 72.0);
  EXPECT_DOUBLE_EQ(*l.distance_mm(1, 3), 72.0);
  EXPECT_DOUBLE_EQ(*l.distance_mm(0, 3), 78.0);
  EXPECT_DOUBLE_EQ(*l.distance_mm(1, 2), 78.0);
  EXPECT_NO_THROW(l.validate());
  EXPECT_DOUBLE_EQ(l.sheet_size_mm().x, 50.0);
  EXPECT_DOUBLE_EQ(l.sheet_size_mm().y, 92.0);
}

TEST(Layout, JsonRoundTrip) {
  const auto l = ReferenceLayout::default_layout();
  const auto j = layout_to_json(l);
  EXPECT_EQ(j.at("schema"), "ro-layout/1");
  EXPECT_TRUE(j.at("pair_distances_mm").contains("0-3"));
  const auto back = layout_from_json(j);
  EXPECT_EQ(back.required_ids, l.required_ids);
  EXPECT_EQ(back.pair_distances_mm, l.pair_distances_mm);
  EXPECT_EQ(back.marker_side_mm, l.marker_side_mm);
}

TEST(Layout, RejectsIncompleteOrInvalid) {
  auto j = layout_to_json(ReferenceLayout::default_layout());
  j["pair_distances_mm"].erase("1-2");
  EXPECT_THROW(layout_from_json(j), invalid_input_error);
  auto k = layout_to_json(ReferenceLayout::default_layout());
  k["marker_side_mm"] = 0;
  EXPECT_THROW(layout_from_json(k), invalid_input_error);
  auto s = layout_to_json(ReferenceLayout::default_layout());
  s["schema"] = "ro-layout/9";
  EXPECT_THROW(layout_from_json(s), invalid_input_error);
}
