#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "woundambit/error.hpp"
#include "woundambit/raster.hpp"

namespace woundambit {

/// Default intensity threshold for turning annotation or prediction rasters into masks.
inline constexpr int kDefaultBinarizeThreshold = 128;

/// Rectangular grid of wound (true) / background (false) pixels. Never empty.
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false) {
    if (width < 1 || height < 1) {
      throw invalid_input_error("mask dimensions must be at least 1x1");
    }
    cells_ = Raster<std::uint8_t>(width, height, fill ? 1 : 0);
  }

  int width() const noexcept { return cells_.width(); }
  int height() const noexcept { return cells_.height(); }
  std::size_t size() const noexcept { return cells_.size(); }

  bool contains(int x, int y) const noexcept { return cells_.contains(x, y); }
  bool at(int x, int y) const noexcept { return cells_(x, y) != 0; }
  /// Out-of-bounds coordinates read as background.
  bool test(int x, int y) const noexcept { return contains(x, y) && at(x, y); }
  void set(int x, int y, bool value = true) noexcept { cells_(x, y) = value ? 1 : 0; }

  /// One byte per pixel, 0 or 1, row-major.
  std::span<const std::uint8_t> cells() const noexcept { return cells_.pixels(); }

  bool same_shape(const BinaryMask& other) const noexcept {
    return width() == other.width() && height() == other.height();
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Raster<std::uint8_t> cells_;
};

/// Foreground iff intensity >= threshold. Color input goes through Rec. 601 luma first.
template <typename Pixel>
BinaryMask binarize(const Raster<Pixel>& image, int threshold = kDefaultBinarizeThreshold) {
  if (image.empty()) throw invalid_input_error("cannot binarize an empty image");
  if (threshold < 0 || threshold > 255) {
    throw invalid_input_error("binarize threshold must lie in [0, 255]");
  }
  BinaryMask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      mask.set(x, y, luminance(image(x, y)) >= threshold);
    }
  }
  return mask;
}

/// Foreground rendered as 255, background as 0.
inline GrayImage to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  auto cells = mask.cells();
  auto px = out.pixels();
  for (std::size_t i = 0; i < cells.size(); ++i) px[i] = cells[i] ? 255 : 0;
  return out;
}

inline BinaryMask resize_nearest(const BinaryMask& mask, int width, int height) {
  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height() - 1,
                            static_cast<int>((y + 0.5) * mask.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width() - 1,
                              static_cast<int>((x + 0.5) * mask.width() / width));
      out.set(x, y, mask.at(sx, sy));
    }
  }
  return out;
}

inline std::size_t area_px(const BinaryMask& mask) noexcept {
  std::size_t n = 0;
  for (auto c : mask.cells()) n += c;
  return n;
}

/// 8-connected component labelling. Background is 0; components are numbered 1..count
/// in raster order of their first pixel.
struct ComponentLabels {
  Raster<int> labels;
  int count = 0;

  /// Pixel count of each component, indexed by label - 1.
  std::vector<std::size_t> areas() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(count), 0);
    for (int l : labels.pixels()) {
      if (l > 0) ++out[static_cast<std::size_t>(l - 1)];
    }
    return out;
  }
};

inline ComponentLabels connected_components(const BinaryMask& mask) {
  ComponentLabels result{Raster<int>(mask.width(), mask.height(), 0), 0};
  auto& labels = result.labels;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y) || labels(x, y) != 0) continue;
      const int label = ++result.count;
      labels(x, y) = label;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (mask.test(nx, ny) && labels(nx, ny) == 0) {
              labels(nx, ny) = label;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
    }
  }
  return result;
}

/// Mask holding only the pixels of one labelled component.
inline BinaryMask component_mask(const ComponentLabels& cc, int label) {
  BinaryMask out(cc.labels.width(), cc.labels.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (cc.labels(x, y) == label) out.set(x, y);
    }
  }
  return out;
}

}  // namespace woundambit
