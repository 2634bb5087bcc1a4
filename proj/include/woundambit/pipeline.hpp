#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "woundambit/calibration.hpp"
#include "woundambit/expert_eval.hpp"
#include "woundambit/marker_detect.hpp"
#include "woundambit/mask.hpp"
#include "woundambit/measure.hpp"
#include "woundambit/raster.hpp"

namespace woundambit {

struct MeasureOptions {
  ReferenceLayout layout = ReferenceLayout::default_layout();
  const MarkerDictionary* dictionary = &builtin_dictionary();
  DetectionParams detection;
  double step_px = 1.0;
  /// Nearest-neighbour resize of a mask whose size differs from the photo's.
  bool resize_mask = false;
};

struct MeasureResult {
  std::vector<MarkerDetection> markers;
  ScaleEstimate scale;
  CoplanarityCheck coplanarity;
  MeasurementSet measurements;
  std::vector<std::string> warnings;
};

/// Photo + wound mask -> physical wound sizes: detect markers, estimate the scale, measure
/// every contour. Throws no_reference_error when no layout marker is visible.
inline MeasureResult run_measurement(const GrayImage& photo, BinaryMask mask,
                                     const MeasureOptions& opts = {}) {
  if (photo.width() != mask.width() || photo.height() != mask.height()) {
    if (!opts.resize_mask) {
      throw invalid_input_error("mask size " + std::to_string(mask.width()) + "x" +
                                std::to_string(mask.height()) + " differs from image size " +
                                std::to_string(photo.width()) + "x" +
                                std::to_string(photo.height()));
    }
    mask = resize_nearest(mask, photo.width(), photo.height());
  }
  MeasureResult r;
  r.markers = detect_markers(photo, *opts.dictionary, opts.detection);
  r.scale = estimate_scale(r.markers, opts.layout);
  r.coplanarity = coplanarity_check(r.scale);
  if (!r.coplanarity.ok) r.warnings.push_back(r.coplanarity.message);
  if (r.scale.method == ScaleMethod::single_marker) {
    r.warnings.push_back("only one reference marker detected; scale from its side lengths");
  }
  r.measurements = measure_wounds(mask, r.scale, opts.step_px);
  return r;
}

inline MeasureResult run_measurement(const RgbImage& photo, BinaryMask mask,
                                     const MeasureOptions& opts = {}) {
  return run_measurement(to_gray(photo), std::move(mask), opts);
}

namespace detail {
inline nlohmann::json point_json(Point2d p) { return nlohmann::json::array({p.x, p.y}); }
}  // namespace detail

inline nlohmann::json measurement_to_json(const MeasureResult& r) {
  nlohmann::json j;
  j["schema"] = "measurement/1";
  j["px_per_mm"] = r.scale.px_per_mm;
  j["method"] = to_string(r.scale.method);
  j["n_markers"] = r.scale.n_markers;
  j["n_pairs"] = r.scale.n_pairs;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.scale.per_pair_ratios) {
    pairs.push_back({{"ids", {p.id_a, p.id_b}}, {"px_per_mm", p.ratio}});
  }
  j["pair_ratios"] = pairs;
  nlohmann::json markers = nlohmann::json::array();
  for (const auto& m : r.markers) {
    nlohmann::json corners = nlohmann::json::array();
    for (const auto& c : m.corners) corners.push_back(detail::point_json(c));
    markers.push_back({{"id", m.id}, {"corners", corners}, {"bit_errors", m.bit_errors},
                       {"rotation", m.decode_rotation}});
  }
  j["markers"] = markers;
  j["warnings"] = r.warnings;
  nlohmann::json wounds = nlohmann::json::array();
  for (const auto& w : r.measurements.wounds) {
    wounds.push_back({{"contour_index", w.contour_index},
                      {"area_px", w.area_px},
                      {"area_mm2", w.area_mm2},
                      {"height_mm", w.height_mm},
                      {"width_mm", w.width_mm},
                      {"height_endpoints",
                       {detail::point_json(w.height_endpoints[0]), detail::point_json(w.height_endpoints[1])}},
                      {"width_endpoints",
                       {detail::point_json(w.width_endpoints[0]), detail::point_json(w.width_endpoints[1])}}});
  }
  j["wounds"] = wounds;
  j["total_area_mm2"] = r.measurements.total_area_mm2;
  return j;
}

/// Height and width of the largest measured wound in a measurement/1 document; empty when
/// the document lists no wound.
inline std::optional<SizePrediction> prediction_from_measurement(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "measurement/1") {
      throw invalid_input_error("unsupported measurement schema " + j.at("schema").dump());
    }
    const auto& wounds = j.at("wounds");
    if (wounds.empty()) return std::nullopt;
    return SizePrediction{wounds.at(0).at("height_mm").get<double>(),
                          wounds.at(0).at("width_mm").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("malformed measurement: ") + e.what());
  }
}

}  // namespace woundambit
