#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "woundambit/error.hpp"
#include "woundambit/mask.hpp"

namespace woundambit {

/// Pixel confusion counts with wound as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts accumulate(const BinaryMask& pred, const BinaryMask& gt,
                                  ConfusionCounts acc = {}) {
  if (!pred.same_shape(gt)) {
    throw invalid_input_error("prediction and ground truth differ in size (" +
                              std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                              " vs " + std::to_string(gt.width()) + "x" +
                              std::to_string(gt.height()) + ")");
  }
  auto p = pred.cells();
  auto g = gt.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const unsigned code = (p[i] ? 2u : 0u) | (g[i] ? 1u : 0u);
    switch (code) {
      case 3: ++acc.tp; break;
      case 2: ++acc.fp; break;
      case 1: ++acc.fn; break;
      default: ++acc.tn; break;
    }
  }
  return acc;
}

/// Micro-averaged scores computed from pooled counts. A 0/0 ratio is reported as 1.0 and
/// sets `degenerate`.
struct MetricReport {
  double miou = 0.0;
  double mdsc = 0.0;
  double mprc = 0.0;
  double mrec = 0.0;
  bool degenerate = false;

  /// "mIoU 79.8 | mDSC 88.2 | mPrc 93.1 | mRec 85.3"
  std::string table_row() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "mIoU %.1f | mDSC %.1f | mPrc %.1f | mRec %.1f", 100 * miou,
                  100 * mdsc, 100 * mprc, 100 * mrec);
    return buf;
  }
};

inline MetricReport finalize(const ConfusionCounts& c) {
  MetricReport r;
  auto ratio = [&](double num, double den) {
    if (den == 0) {
      r.degenerate = true;
      return 1.0;
    }
    return num / den;
  };
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  r.miou = ratio(tp, tp + fp + fn);
  r.mdsc = ratio(2 * tp, 2 * tp + fp + fn);
  r.mprc = ratio(tp, tp + fp);
  r.mrec = ratio(tp, tp + fn);
  return r;
}

struct VoteResult {
  BinaryMask mask;
  std::vector<std::string> warnings;
};

/// Pixel-wise majority vote: foreground iff strictly more than half of the K inputs are
/// foreground. With even K a tie falls to background, and a warning is attached.
inline VoteResult majority_vote(std::span<const BinaryMask> masks) {
  if (masks.empty()) throw invalid_input_error("majority vote needs at least one mask");
  const auto& first = masks.front();
  for (const auto& m : masks) {
    if (!m.same_shape(first)) throw invalid_input_error("majority vote inputs differ in size");
  }
  VoteResult out{BinaryMask(first.width(), first.height()), {}};
  if (masks.size() % 2 == 0) {
    out.warnings.push_back("even number of masks (" + std::to_string(masks.size()) +
                           "); tied pixels are set to background");
  }
  std::vector<std::uint32_t> votes(first.size(), 0);
  for (const auto& m : masks) {
    auto c = m.cells();
    for (std::size_t i = 0; i < c.size(); ++i) votes[i] += c[i];
  }
  const std::size_t k = masks.size();
  for (int y = 0; y < first.height(); ++y) {
    for (int x = 0; x < first.width(); ++x) {
      const auto v = votes[static_cast<std::size_t>(y) * first.width() + x];
      out.mask.set(x, y, 2 * static_cast<std::size_t>(v) > k);
    }
  }
  return out;
}

}  // namespace woundambit
