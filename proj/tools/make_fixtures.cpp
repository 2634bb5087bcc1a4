// Regenerates the committed test fixtures. Output is byte-for-byte deterministic.
//
//   make_fixtures <out-dir>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "woundambit/woundambit.hpp"

namespace fs = std::filesystem;
using namespace woundambit;

namespace {

constexpr double kFixturePxPerMm = 4.0;
constexpr double kSheetAngle = 0.12;

Ellipse fixture_wound() { return {{0, 0}, 40.0, 15.0, 0.35}; }

void write_scene(const fs::path& dir, const std::string& name, const ReferenceSheet& sheet,
                 std::vector<int> hidden) {
  auto spec = standard_scene(kFixturePxPerMm, kSheetAngle, fixture_wound(), sheet);
  spec.hidden_markers = std::move(hidden);
  write_png(dir / (name + ".png"), render_scene(spec, sheet));
  write_mask_png(dir / (name + "_mask.png"), rasterize_ellipses(spec.width, spec.height, spec.wounds));
}

/// Textured test image: a smooth random intensity field with dark blobs on top.
RgbImage pattern(std::uint32_t seed) {
  constexpr int n = 96;
  RgbImage img(n, n);
  std::mt19937 rng(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (rng() / 4294967296.0); };
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 5; ++i) {
    waves.push_back({uniform(-4, 4), uniform(-4, 4), uniform(0, 2 * std::numbers::pi), uniform(15, 45)});
  }
  std::vector<Ellipse> blobs;
  for (int i = 0; i < 6; ++i) {
    blobs.push_back({{uniform(0, n), uniform(0, n)}, uniform(6, 22), uniform(4, 12), uniform(0, std::numbers::pi)});
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double v = 128;
      for (const auto& w : waves) {
        v += w.amp * std::cos(2 * std::numbers::pi * (w.fx * x + w.fy * y) / n + w.phase);
      }
      for (const auto& e : blobs) {
        if (e.contains({static_cast<double>(x), static_cast<double>(y)})) v *= 0.45;
      }
      const auto u = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      img(x, y) = {u, static_cast<std::uint8_t>(u * 3 / 4), static_cast<std::uint8_t>(u / 2)};
    }
  }
  return img;
}

RgbImage brighten(const RgbImage& in, double factor) {
  RgbImage out = in;
  for (auto& p : out.pixels()) {
    auto f = [&](std::uint8_t c) {
      return static_cast<std::uint8_t>(std::min(255L, std::lround(c * factor)));
    };
    p = {f(p.r), f(p.g), f(p.b)};
  }
  return out;
}

RgbImage add_noise(const RgbImage& in, int amplitude, std::uint32_t seed) {
  RgbImage out = in;
  std::mt19937 rng(seed);
  for (auto& p : out.pixels()) {
    auto f = [&](std::uint8_t c) {
      const int d = static_cast<int>(rng() % (2 * amplitude + 1)) - amplitude;
      return static_cast<std::uint8_t>(std::clamp(c + d, 0, 255));
    };
    p = {f(p.r), f(p.g), f(p.b)};
  }
  return out;
}

void write_dedup_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  for (int k = 0; k < 8; ++k) {
    write_png(dir / ("img" + std::to_string(k) + ".png"), pattern(1000u + static_cast<std::uint32_t>(k)));
  }
  write_png(dir / "img8.png", brighten(pattern(1000u), 1.1));
  write_png(dir / "img9.png", add_noise(pattern(1006u), 6, 77u));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <out-dir>\n", argv[0]);
    return 2;
  }
  try {
    const fs::path out = argv[1];
    fs::create_directories(out);
    const auto layout = ReferenceLayout::default_layout();
    ReferenceSheet sheet(layout, builtin_dictionary());
    const std::string text = layout_to_json(layout).dump(2) + "\n";
    write_file_bytes(out / "layout.json",
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    write_scene(out, "scene", sheet, {});
    write_scene(out, "scene_single", sheet, {1, 2, 3});
    write_scene(out, "scene_nomarker", sheet, {0, 1, 2, 3});
    write_dedup_corpus(out / "dedup");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixtures: %s\n", e.what());
    return 4;
  }
  return 0;
}
