#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace woundambit;
using namespace testsupport;

namespace {

BinaryMask filled(int w, int h, bool v) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, v);
  }
  return m;
}

}  // namespace

TEST(Accumulate, Identity) {
  const auto c = accumulate(filled(4, 4, true), filled(4, 4, true));
  EXPECT_EQ(c, (ConfusionCounts{16, 0, 0, 0}));
}

TEST(Accumulate, TotalMiss) {
  const auto c = accumulate(filled(4, 4, true), filled(4, 4, false));
  EXPECT_EQ(c, (ConfusionCounts{0, 16, 0, 0}));
}

TEST(Accumulate, MatchesPixelLoop) {
  std::mt19937 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_mask(rng, 8, 8), g = random_mask(rng, 8, 8);
    EXPECT_EQ(accumulate(p, g), oracle::confusion(p, g));
  }
}

TEST(Accumulate, AddsToExistingCounts) {
  const ConfusionCounts start{1, 2, 3, 4};
  const auto c = accumulate(filled(2, 2, true), filled(2, 2, true), start);
  EXPECT_EQ(c, (ConfusionCounts{5, 2, 3, 4}));
}

TEST(Accumulate, ShapeMismatchThrows) {
  EXPECT_THROW(accumulate(BinaryMask(4, 4), BinaryMask(4, 5)), invalid_input_error);
}

TEST(Finalize, Identity) {
  const auto r = finalize({16, 0, 0, 0});
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.mdsc, 1.0);
  EXPECT_EQ(r.mprc, 1.0);
  EXPECT_EQ(r.mrec, 1.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(Finalize, OneEach) {
  const auto r = finalize({1, 1, 1, 0});
  EXPECT_DOUBLE_EQ(r.miou, 1.0 / 3);
  EXPECT_DOUBLE_EQ(r.mdsc, 0.5);
  EXPECT_DOUBLE_EQ(r.mprc, 0.5);
  EXPECT_DOUBLE_EQ(r.mrec, 0.5);
}

TEST(Finalize, AllZeroIsDegenerateOne) {
  const auto r = finalize({});
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.mdsc, 1.0);
  EXPECT_EQ(r.mprc, 1.0);
  EXPECT_EQ(r.mrec, 1.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(Finalize, EmptyPredictionHasDegeneratePrecisionOnly) {
  const auto r = finalize({0, 0, 5, 10});
  EXPECT_EQ(r.miou, 0.0);
  EXPECT_EQ(r.mrec, 0.0);
  EXPECT_EQ(r.mprc, 1.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(Finalize, TableRowFormatting) {
  EXPECT_EQ(finalize({1, 1, 1, 0}).table_row(), "mIoU 33.3 | mDSC 50.0 | mPrc 50.0 | mRec 50.0");
}

TEST(Metrics, MicroDiffersFromMacro) {
  // small image with perfect overlap, large image with poor overlap
  BinaryMask p1(2, 2), g1(2, 2);
  p1.set(0, 0);
  g1.set(0, 0);
  BinaryMask p2(10, 10), g2(10, 10);
  for (int x = 0; x < 10; ++x) {
    p2.set(x, 0);
    if (x < 5) g2.set(x, 0);
    g2.set(x, 1);
  }
  const auto c1 = accumulate(p1, g1), c2 = accumulate(p2, g2);
  const double macro = (finalize(c1).miou + finalize(c2).miou) / 2;
  const double micro = finalize(c1 + c2).miou;
  // c1: tp 1. c2: tp 5, fp 5, fn 10. pooled: 6 / 21
  EXPECT_DOUBLE_EQ(micro, 6.0 / 21);
  EXPECT_DOUBLE_EQ(macro, (1.0 + 5.0 / 20) / 2);
  EXPECT_NE(micro, macro);
}

TEST(Metrics, PropertiesOnRandomPairs) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_mask(rng, 16, 16, (trial % 10) / 10.0);
    const auto g = random_mask(rng, 16, 16, (trial % 7) / 7.0);
    const auto r = finalize(accumulate(p, g));
    EXPECT_NEAR(r.mdsc, 2 * r.miou / (1 + r.miou), 1e-12);
    EXPECT_GE(r.mdsc, r.miou);
    const auto s = finalize(accumulate(g, p));
    EXPECT_DOUBLE_EQ(s.miou, r.miou);
    EXPECT_DOUBLE_EQ(s.mdsc, r.mdsc);
    EXPECT_DOUBLE_EQ(s.mprc, r.mrec);
    EXPECT_DOUBLE_EQ(s.mrec, r.mprc);
    const auto self = finalize(accumulate(p, p));
    EXPECT_EQ(self.miou, 1.0);
    EXPECT_EQ(self.mprc, 1.0);
  }
}

TEST(Metrics, AccumulationIsAssociative) {
  std::mt19937 rng(17);
  std::vector<ConfusionCounts> parts;
  for (int i = 0; i < 9; ++i) parts.push_back(accumulate(random_mask(rng, 9, 7), random_mask(rng, 9, 7)));
  ConfusionCounts left, right;
  for (const auto& c : parts) left += c;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) right = *it + right;
  EXPECT_EQ(left, right);
}

TEST(MajorityVote, Examples) {
  auto fg = filled(1, 1, true), bg = filled(1, 1, false);
  const std::vector<BinaryMask> three_of_five{fg, fg, fg, bg, bg};
  EXPECT_TRUE(majority_vote(three_of_five).mask.at(0, 0));
  const std::vector<BinaryMask> two_of_five{fg, bg, fg, bg, bg};
  EXPECT_FALSE(majority_vote(two_of_five).mask.at(0, 0));
  std::mt19937 rng(1);
  const auto m = random_mask(rng, 13, 9);
  const std::vector<BinaryMask> one{m};
  const auto r = majority_vote(one);
  EXPECT_EQ(r.mask, m);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(MajorityVote, EvenTieIsBackgroundWithWarning) {
  const std::vector<BinaryMask> v{filled(2, 2, true), filled(2, 2, false)};
  const auto r = majority_vote(v);
  EXPECT_EQ(area_px(r.mask), 0u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(MajorityVote, ErrorsOnEmptyOrMismatched) {
  EXPECT_THROW(majority_vote(std::vector<BinaryMask>{}), invalid_input_error);
  const std::vector<BinaryMask> v{BinaryMask(2, 2), BinaryMask(3, 2)};
  EXPECT_THROW(majority_vote(v), invalid_input_error);
}

TEST(MajorityVote, ExhaustiveTruthTables) {
  for (int k : {1, 3, 5}) {
    // one pixel per vote combination
    const int combos = 1 << k;
    std::vector<BinaryMask> masks(static_cast<std::size_t>(k), BinaryMask(combos, 1));
    for (int c = 0; c < combos; ++c) {
      for (int i = 0; i < k; ++i) masks[i].set(c, 0, (c >> i) & 1);
    }
    const auto out = majority_vote(masks).mask;
    for (int c = 0; c < combos; ++c) {
      EXPECT_EQ(out.at(c, 0), 2 * std::popcount(static_cast<unsigned>(c)) > k) << "k " << k << " combo " << c;
    }
  }
}

TEST(MajorityVote, PermutationInvariantAndMonotone) {
  std::mt19937 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + 2 * static_cast<int>(rng() % 4);
    std::vector<BinaryMask> masks;
    for (int i = 0; i < k; ++i) masks.push_back(random_mask(rng, 12, 12));
    const auto base = majority_vote(masks).mask;
    auto shuffled = masks;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    ASSERT_EQ(majority_vote(shuffled).mask, base);
    // add foreground votes to one member: no foreground pixel may turn background
    auto more = masks;
    auto& target = more[rng() % more.size()];
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) {
        if (rng() % 2) target.set(x, y);
      }
    }
    const auto grown = majority_vote(more).mask;
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) {
        if (base.at(x, y)) {
          ASSERT_TRUE(grown.at(x, y));
        }
      }
    }
  }
}
