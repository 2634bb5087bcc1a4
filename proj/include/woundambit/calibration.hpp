#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "woundambit/error.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/marker_detect.hpp"

namespace woundambit {

/// Physical description of the printed reference object.
struct ReferenceLayout {
  double marker_side_mm = 12.0;
  double margin_mm = 4.0;
  std::vector<int> required_ids;
  /// Centre-to-centre distances keyed by (smaller id, larger id).
  std::map<std::pair<int, int>, double> pair_distances_mm;
  /// Marker centres in sheet coordinates (mm, y down). Only needed to render sheets.
  std::map<int, Point2d> marker_centers_mm;

  static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

  std::optional<double> distance_mm(int a, int b) const {
    auto it = pair_distances_mm.find(key(a, b));
    if (it == pair_distances_mm.end()) return std::nullopt;
    return it->second;
  }

  bool requires_id(int id) const { return std::ranges::find(required_ids, id) != required_ids.end(); }

  void validate() const {
    if (!(marker_side_mm > 0)) throw invalid_input_error("layout marker_side_mm must be > 0");
    if (!(margin_mm >= 0)) throw invalid_input_error("layout margin_mm must be >= 0");
    if (required_ids.empty()) throw invalid_input_error("layout lists no marker ids");
    if (std::set<int>(required_ids.begin(), required_ids.end()).size() != required_ids.size()) {
      throw invalid_input_error("layout required_ids contains duplicates");
    }
    for (const auto& [k, d] : pair_distances_mm) {
      if (!(d > 0)) throw invalid_input_error("layout pair distances must be > 0");
    }
    for (std::size_t i = 0; i < required_ids.size(); ++i) {
      for (std::size_t j = i + 1; j < required_ids.size(); ++j) {
        if (!distance_mm(required_ids[i], required_ids[j])) {
          throw invalid_input_error("layout misses distance for pair " +
                                    std::to_string(key(required_ids[i], required_ids[j]).first) +
                                    "-" +
                                    std::to_string(key(required_ids[i], required_ids[j]).second));
        }
      }
    }
  }

  /// Sheet size in mm when marker centres are known: bounding box of the markers plus margin.
  Point2d sheet_size_mm() const {
    double w = 0, h = 0;
    for (const auto& [id, c] : marker_centers_mm) {
      w = std::max(w, c.x + marker_side_mm / 2 + margin_mm);
      h = std::max(h, c.y + marker_side_mm / 2 + margin_mm);
    }
    return {w, h};
  }

  /// Builds a layout from marker centres; every pairwise distance is derived from them.
  static ReferenceLayout from_centers(std::map<int, Point2d> centers, double side_mm,
                                      double margin_mm) {
    ReferenceLayout l;
    l.marker_side_mm = side_mm;
    l.margin_mm = margin_mm;
    l.marker_centers_mm = std::move(centers);
    for (const auto& [a, ca] : l.marker_centers_mm) {
      l.required_ids.push_back(a);
      for (const auto& [b, cb] : l.marker_centers_mm) {
        if (a < b) l.pair_distances_mm[{a, b}] = distance(ca, cb);
      }
    }
    return l;
  }

  /// Four 12 mm markers with 4 mm margins whose centres sit on the corners of a
  /// 30 mm x 72 mm rectangle: ids 0 and 1 on top, 2 and 3 at the bottom.
  static ReferenceLayout default_layout() {
    const double off = 12.0 / 2 + 4.0;
    return from_centers({{0, {off, off}},
                         {1, {off + 30.0, off}},
                         {2, {off, off + 72.0}},
                         {3, {off + 30.0, off + 72.0}}},
                        12.0, 4.0);
  }
};

inline nlohmann::json layout_to_json(const ReferenceLayout& layout) {
  nlohmann::json j;
  j["schema"] = "ro-layout/1";
  j["marker_side_mm"] = layout.marker_side_mm;
  j["margin_mm"] = layout.margin_mm;
  j["required_ids"] = layout.required_ids;
  nlohmann::json pairs = nlohmann::json::object();
  for (const auto& [k, d] : layout.pair_distances_mm) {
    pairs[std::to_string(k.first) + "-" + std::to_string(k.second)] = d;
  }
  j["pair_distances_mm"] = pairs;
  if (!layout.marker_centers_mm.empty()) {
    nlohmann::json centers = nlohmann::json::object();
    for (const auto& [id, c] : layout.marker_centers_mm) centers[std::to_string(id)] = {c.x, c.y};
    j["marker_centers_mm"] = centers;
  }
  return j;
}

inline ReferenceLayout layout_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "ro-layout/1") {
      throw invalid_input_error("unsupported layout schema " + j.at("schema").dump());
    }
    ReferenceLayout l;
    l.marker_side_mm = j.at("marker_side_mm").get<double>();
    l.margin_mm = j.value("margin_mm", 4.0);
    l.required_ids = j.at("required_ids").get<std::vector<int>>();
    for (const auto& [name, d] : j.at("pair_distances_mm").items()) {
      const auto dash = name.find('-');
      if (dash == std::string::npos) throw invalid_input_error("bad pair key '" + name + "'");
      const int a = std::stoi(name.substr(0, dash));
      const int b = std::stoi(name.substr(dash + 1));
      if (a >= b) throw invalid_input_error("pair key '" + name + "' must be written i-j with i < j");
      l.pair_distances_mm[{a, b}] = d.get<double>();
    }
    if (j.contains("marker_centers_mm")) {
      for (const auto& [name, c] : j.at("marker_centers_mm").items()) {
        l.marker_centers_mm[std::stoi(name)] = {c.at(0).get<double>(), c.at(1).get<double>()};
      }
    }
    l.validate();
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("malformed layout: ") + e.what());
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const invalid_input_error*>(&e)) throw;
    throw invalid_input_error(std::string("malformed layout: ") + e.what());
  }
}

enum class ScaleMethod { pairwise, single_marker };

inline const char* to_string(ScaleMethod m) {
  return m == ScaleMethod::pairwise ? "pairwise" : "single-marker";
}

struct PairRatio {
  int id_a = 0;
  int id_b = 0;
  double ratio = 0.0;  ///< px per mm
};

struct ScaleEstimate {
  double px_per_mm = 0.0;
  int n_markers = 0;
  int n_pairs = 0;
  ScaleMethod method = ScaleMethod::pairwise;
  std::vector<PairRatio> per_pair_ratios;
};

/// Pixel-to-millimetre scale from detected markers.
///
/// With two or more usable markers every detected pair with a known distance yields
/// `centre distance px / distance mm` and the estimate is their arithmetic mean. A single
/// marker falls back to the mean of its width and height (each the mean of two opposite
/// sides) over the printed side length. Markers not in the layout are ignored.
inline ScaleEstimate estimate_scale(std::span<const MarkerDetection> detections,
                                    const ReferenceLayout& layout) {
  std::vector<const MarkerDetection*> usable;
  for (const auto& d : detections) {
    if (!layout.requires_id(d.id)) continue;
    const bool dup = std::ranges::any_of(usable, [&](const auto* u) { return u->id == d.id; });
    if (!dup) usable.push_back(&d);
  }
  if (usable.empty()) {
    throw no_reference_error("no reference marker of the layout was detected");
  }
  // Pair ratios in id order so the result does not depend on detection order.
  std::ranges::sort(usable, {}, [](const auto* d) { return d->id; });

  ScaleEstimate est;
  est.n_markers = static_cast<int>(usable.size());
  if (usable.size() == 1) {
    const auto& c = usable.front()->corners;
    const double width = (distance(c[0], c[1]) + distance(c[3], c[2])) / 2.0;
    const double height = (distance(c[0], c[3]) + distance(c[1], c[2])) / 2.0;
    est.method = ScaleMethod::single_marker;
    est.px_per_mm = (width + height) / 2.0 / layout.marker_side_mm;
    return est;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      const auto mm = layout.distance_mm(usable[i]->id, usable[j]->id);
      if (!mm) continue;
      const double r = distance(usable[i]->center(), usable[j]->center()) / *mm;
      est.per_pair_ratios.push_back({usable[i]->id, usable[j]->id, r});
      sum += r;
    }
  }
  if (est.per_pair_ratios.empty()) {
    throw no_reference_error("detected markers have no known pairwise distance");
  }
  est.method = ScaleMethod::pairwise;
  est.n_pairs = static_cast<int>(est.per_pair_ratios.size());
  est.px_per_mm = sum / est.n_pairs;
  return est;
}

inline constexpr double kCoplanarityThreshold = 0.15;

struct CoplanarityCheck {
  bool ok = true;
  double dispersion = 0.0;  ///< (max - min) / median of the pair ratios
  std::string message;
};

/// Flags pair ratios that disagree, the symptom of a reference object that is not in the
/// wound plane. Diagnostic only.
inline CoplanarityCheck coplanarity_check(std::span<const double> ratios,
                                          double threshold = kCoplanarityThreshold) {
  CoplanarityCheck out;
  if (ratios.size() < 2) return out;
  std::vector<double> v(ratios.begin(), ratios.end());
  std::ranges::sort(v);
  const std::size_t n = v.size();
  const double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  out.dispersion = (v.back() - v.front()) / median;
  if (out.dispersion > threshold) {
    out.ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "marker pair ratios disagree (dispersion %.3f > %.2f); the reference object may "
                  "not lie in the wound plane",
                  out.dispersion, threshold);
    out.message = buf;
  }
  return out;
}

inline CoplanarityCheck coplanarity_check(const ScaleEstimate& est,
                                          double threshold = kCoplanarityThreshold) {
  std::vector<double> r;
  for (const auto& p : est.per_pair_ratios) r.push_back(p.ratio);
  return coplanarity_check(r, threshold);
}

}  // namespace woundambit
