#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "woundambit/error.hpp"

namespace woundambit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Dense row-major 2-D pixel grid.
template <typename Pixel>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster() = default;

  Raster(int width, int height, Pixel fill = Pixel{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw invalid_input_error("raster dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  Pixel& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const Pixel& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  std::span<Pixel> pixels() noexcept { return data_; }
  std::span<const Pixel> pixels() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> data_;
};

using GrayImage = Raster<std::uint8_t>;
using RgbImage = Raster<Rgb>;

/// Rec. 601 luma, rounded to nearest.
constexpr std::uint8_t luminance(Rgb p) noexcept {
  return static_cast<std::uint8_t>((299u * p.r + 587u * p.g + 114u * p.b + 500u) / 1000u);
}
constexpr std::uint8_t luminance(std::uint8_t v) noexcept { return v; }

template <typename Pixel>
GrayImage to_gray(const Raster<Pixel>& image) {
  GrayImage out(image.width(), image.height());
  std::ranges::transform(image.pixels(), out.pixels().begin(),
                         [](const Pixel& p) { return luminance(p); });
  return out;
}

inline RgbImage to_rgb(const GrayImage& image) {
  RgbImage out(image.width(), image.height());
  std::ranges::transform(image.pixels(), out.pixels().begin(),
                         [](std::uint8_t v) { return Rgb{v, v, v}; });
  return out;
}

/// Rotates a raster by 90 degrees clockwise as displayed (y pointing down).
template <typename Pixel>
Raster<Pixel> rotate_cw(const Raster<Pixel>& in) {
  Raster<Pixel> out(in.height(), in.width());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(x, y) = in(y, in.height() - 1 - x);
    }
  }
  return out;
}

/// Nearest-neighbour resampling to an arbitrary size.
template <typename Pixel>
Raster<Pixel> resize_nearest(const Raster<Pixel>& in, int width, int height) {
  if (in.empty()) throw invalid_input_error("cannot resize an empty raster");
  Raster<Pixel> out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(in.height() - 1,
                            static_cast<int>((y + 0.5) * in.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(in.width() - 1,
                              static_cast<int>((x + 0.5) * in.width() / width));
      out(x, y) = in(sx, sy);
    }
  }
  return out;
}

}  // namespace woundambit
