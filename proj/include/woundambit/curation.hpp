#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "woundambit/error.hpp"
#include "woundambit/raster.hpp"

namespace woundambit {

/// Hamming threshold used to call two images near-duplicates.
inline constexpr int kDefaultDedupThreshold = 11;

/// 64-bit DCT sign hash; bit k belongs to the k-th selected coefficient.
struct PerceptualHash {
  std::uint64_t bits = 0;

  bool bit(int k) const noexcept { return (bits >> k) & 1u; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
    return buf;
  }

  friend bool operator==(const PerceptualHash&, const PerceptualHash&) = default;
};

inline int hamming_distance(PerceptualHash a, PerceptualHash b) noexcept {
  return std::popcount(a.bits ^ b.bits);
}

namespace detail {

/// Box-filter resampling: output cell o covers [o*s/d, (o+1)*s/d) of the source and is the
/// overlap-weighted mean of the samples it touches.
inline std::vector<double> resize_area(std::span<const double> src, int sw, int sh, int dw, int dh) {
  // Separable: rows first, then columns.
  auto resample_axis = [](int s, int d) {
    std::vector<std::vector<std::pair<int, double>>> taps(static_cast<std::size_t>(d));
    for (int o = 0; o < d; ++o) {
      const double lo = static_cast<double>(o) * s / d;
      const double hi = static_cast<double>(o + 1) * s / d;
      for (int i = static_cast<int>(std::floor(lo)); i < std::min(s, static_cast<int>(std::ceil(hi))); ++i) {
        const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
        if (overlap > 0) taps[o].emplace_back(i, overlap / (hi - lo));
      }
    }
    return taps;
  };
  const auto tx = resample_axis(sw, dw);
  const auto ty = resample_axis(sh, dh);
  std::vector<double> rows(static_cast<std::size_t>(dw) * sh, 0.0);
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < dw; ++x) {
      double acc = 0;
      for (auto [i, w] : tx[x]) acc += w * src[static_cast<std::size_t>(y) * sw + i];
      rows[static_cast<std::size_t>(y) * dw + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(dw) * dh, 0.0);
  for (int y = 0; y < dh; ++y) {
    for (int x = 0; x < dw; ++x) {
      double acc = 0;
      for (auto [i, w] : ty[y]) acc += w * rows[static_cast<std::size_t>(i) * dw + x];
      out[static_cast<std::size_t>(y) * dw + x] = acc;
    }
  }
  return out;
}

template <int N>
const std::array<double, N * N>& dct_matrix() {
  static const auto m = [] {
    std::array<double, N * N> a{};
    for (int k = 0; k < N; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
      for (int i = 0; i < N; ++i) {
        a[k * N + i] = scale * std::cos(std::numbers::pi / N * (i + 0.5) * k);
      }
    }
    return a;
  }();
  return m;
}

}  // namespace detail

/// DCT-median perceptual hash.
///
/// 1. Rec. 601 grey, area-averaged down (or up) to 32x32.
/// 2. Orthonormal 2-D DCT-II; coefficients rounded to 1e-6 so flat images hash to zero
///    instead of to floating-point noise.
/// 3. The 8x8 low-frequency block (u = row/vertical, v = column) read row-major without
///    the DC term (63 values) followed by coefficient (u=8, v=0): 64 values.
/// 4. Bit k = value k > median of the 64 values (mean of the two middle ones).
template <typename Pixel>
PerceptualHash phash(const Raster<Pixel>& image) {
  constexpr int N = 32;
  if (image.empty()) throw invalid_input_error("cannot hash an empty image");
  std::vector<double> gray(image.size());
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) gray[i] = luminance(px[i]);
  const auto small = detail::resize_area(gray, image.width(), image.height(), N, N);
  const auto& d = detail::dct_matrix<N>();
  // coeff = D * img * D^T, only rows 0..8 and columns 0..7 are needed.
  std::array<double, 9 * N> tmp{};
  for (int u = 0; u < 9; ++u) {
    for (int x = 0; x < N; ++x) {
      double acc = 0;
      for (int y = 0; y < N; ++y) acc += d[u * N + y] * small[static_cast<std::size_t>(y) * N + x];
      tmp[u * N + x] = acc;
    }
  }
  auto coeff = [&](int u, int v) {
    double acc = 0;
    for (int x = 0; x < N; ++x) acc += tmp[u * N + x] * d[v * N + x];
    return std::round(acc * 1e6) / 1e6;
  };
  std::array<double, 64> values{};
  int k = 0;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      if (u == 0 && v == 0) continue;
      values[k++] = coeff(u, v);
    }
  }
  values[k] = coeff(8, 0);
  auto sorted = values;
  std::ranges::sort(sorted);
  const double median = (sorted[31] + sorted[32]) / 2.0;
  PerceptualHash h;
  for (int i = 0; i < 64; ++i) {
    if (values[i] > median) h.bits |= std::uint64_t{1} << i;
  }
  return h;
}

/// One candidate for deduplication. `bytes` holds the raw file content (may be empty when
/// only pixels are available); `image` is empty when decoding failed, with `error` set.
struct DedupItem {
  std::string id;
  std::vector<std::uint8_t> bytes;
  std::optional<GrayImage> image;
  std::string error;
};

struct DuplicatePair {
  std::string duplicate;
  std::string kept;
  std::string reason;  ///< "bytes" or "phash"
  int distance = 0;    ///< Hamming distance (0 for byte matches)
};

struct DedupError {
  std::string id;
  std::string message;
};

struct DedupReport {
  int threshold = kDefaultDedupThreshold;
  std::vector<std::string> kept;
  std::vector<DuplicatePair> duplicates;
  std::vector<DedupError> errors;
  std::unordered_map<std::string, PerceptualHash> hashes;
};

/// Greedy first-kept sweep in input order: an item is a duplicate when its bytes equal a
/// kept item's or its hash is within `threshold` of a kept item's hash (closest kept item,
/// earliest on ties). The first occurrence always survives.
inline DedupReport dedup(std::span<const DedupItem> items, int threshold = kDefaultDedupThreshold) {
  if (threshold < 0 || threshold > 64) throw invalid_input_error("threshold must lie in [0, 64]");
  DedupReport report;
  report.threshold = threshold;
  struct Kept {
    const DedupItem* item;
    PerceptualHash hash;
  };
  std::vector<Kept> kept;
  std::unordered_multimap<std::size_t, std::size_t> by_content;
  auto content_key = [](const std::vector<std::uint8_t>& b) {
    return std::hash<std::string_view>{}(
        std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
  };

  for (const auto& item : items) {
    std::optional<DuplicatePair> dup;
    const std::size_t key = content_key(item.bytes);
    if (!item.bytes.empty()) {
      auto [lo, hi] = by_content.equal_range(key);
      for (auto it = lo; it != hi && !dup; ++it) {
        if (kept[it->second].item->bytes == item.bytes) {
          dup = DuplicatePair{item.id, kept[it->second].item->id, "bytes", 0};
        }
      }
    }
    if (dup) {
      report.duplicates.push_back(*dup);
      continue;
    }
    if (!item.image || item.image->empty()) {
      report.errors.push_back({item.id, item.error.empty() ? "image not decodable" : item.error});
      continue;
    }
    const auto h = phash(*item.image);
    report.hashes[item.id] = h;
    int best = 65;
    const Kept* nearest = nullptr;
    for (const auto& k : kept) {
      const int d = hamming_distance(h, k.hash);
      if (d < best) {
        best = d;
        nearest = &k;
      }
    }
    if (nearest && best <= threshold) {
      report.duplicates.push_back({item.id, nearest->item->id, "phash", best});
      continue;
    }
    if (!item.bytes.empty()) by_content.emplace(key, kept.size());
    kept.push_back({&item, h});
    report.kept.push_back(item.id);
  }
  return report;
}

}  // namespace woundambit
