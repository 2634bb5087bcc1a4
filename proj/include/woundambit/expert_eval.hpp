#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "woundambit/error.hpp"

namespace woundambit {

inline constexpr double kDefaultRelDevThreshold = 0.5;

enum class Verdict { good, bad };

/// One rater's assessment of one image across all presented variants.
struct RatingRecord {
  std::string image;
  std::string rater;
  std::map<std::string, Verdict> verdicts;  ///< variant -> verdict
  std::string best;                         ///< variant chosen as best
  double height_mm = 0.0;
  double width_mm = 0.0;
};

/// Contents of a ratings/1 file. May be partial (an annotation session in progress).
struct RatingsFile {
  std::vector<std::string> raters;
  std::vector<std::string> variants;
  std::vector<RatingRecord> records;
};

inline nlohmann::json record_to_json(const RatingRecord& r) {
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& [v, verdict] : r.verdicts) verdicts[v] = verdict == Verdict::good ? "good" : "bad";
  return {{"image", r.image}, {"rater", r.rater},       {"verdicts", verdicts},
          {"best", r.best},   {"height_mm", r.height_mm}, {"width_mm", r.width_mm}};
}

inline RatingRecord record_from_json(const nlohmann::json& j) {
  RatingRecord r;
  r.image = j.at("image").get<std::string>();
  r.rater = j.at("rater").get<std::string>();
  for (const auto& [v, verdict] : j.at("verdicts").items()) {
    const auto s = verdict.get<std::string>();
    if (s != "good" && s != "bad") throw invalid_input_error("verdict must be good or bad, got " + s);
    r.verdicts[v] = s == "good" ? Verdict::good : Verdict::bad;
  }
  r.best = j.at("best").get<std::string>();
  r.height_mm = j.at("height_mm").get<double>();
  r.width_mm = j.at("width_mm").get<double>();
  if (!(r.height_mm > 0) || !(r.width_mm > 0)) {
    throw invalid_input_error("size estimates must be positive (image " + r.image + ", rater " +
                              r.rater + ")");
  }
  if (!r.verdicts.contains(r.best)) {
    throw invalid_input_error("best choice '" + r.best + "' is not a rated variant (image " +
                              r.image + ")");
  }
  return r;
}

inline nlohmann::json ratings_to_json(const RatingsFile& f) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : f.records) records.push_back(record_to_json(r));
  return {{"schema", "ratings/1"}, {"raters", f.raters}, {"variants", f.variants},
          {"records", records}};
}

inline RatingsFile ratings_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "ratings/1") {
      throw invalid_input_error("unsupported ratings schema " + j.at("schema").dump());
    }
    RatingsFile f;
    f.raters = j.at("raters").get<std::vector<std::string>>();
    f.variants = j.at("variants").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) f.records.push_back(record_from_json(r));
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("malformed ratings file: ") + e.what());
  }
}

/// Complete expert annotations: every (image, rater) has a record covering every variant.
class RatingSet {
 public:
  explicit RatingSet(const RatingsFile& file) : raters_(file.raters), variants_(file.variants) {
    if (raters_.empty() || variants_.empty()) {
      throw invalid_input_error("ratings need at least one rater and one variant");
    }
    const std::set<std::string> variant_set(variants_.begin(), variants_.end());
    const std::set<std::string> rater_set(raters_.begin(), raters_.end());
    for (const auto& r : file.records) {
      if (!rater_set.contains(r.rater)) throw invalid_input_error("unknown rater " + r.rater);
      if (std::ranges::find(images_, r.image) == images_.end()) images_.push_back(r.image);
      std::set<std::string> rated;
      for (const auto& [v, verdict] : r.verdicts) rated.insert(v);
      if (rated != variant_set) {
        throw invalid_input_error("record (" + r.image + ", " + r.rater +
                                  ") does not rate exactly the declared variants");
      }
      if (!records_.emplace(std::pair(r.image, r.rater), r).second) {
        throw invalid_input_error("duplicate record (" + r.image + ", " + r.rater + ")");
      }
    }
    if (images_.empty()) throw invalid_input_error("ratings contain no records");
    for (const auto& img : images_) {
      for (const auto& rater : raters_) {
        if (!records_.contains({img, rater})) {
          throw invalid_input_error("missing record for image " + img + ", rater " + rater);
        }
      }
    }
  }

  const std::vector<std::string>& images() const noexcept { return images_; }
  const std::vector<std::string>& raters() const noexcept { return raters_; }
  const std::vector<std::string>& variants() const noexcept { return variants_; }
  bool has_variant(const std::string& v) const { return std::ranges::find(variants_, v) != variants_.end(); }

  const RatingRecord& record(const std::string& image, const std::string& rater) const {
    return records_.at({image, rater});
  }

 private:
  std::vector<std::string> images_;
  std::vector<std::string> raters_;
  std::vector<std::string> variants_;
  std::map<std::pair<std::string, std::string>, RatingRecord> records_;
};

/// Clinical mask approval: share of all (image, rater) verdicts on `variant` that are good, in %.
inline double cma(const RatingSet& set, const std::string& variant) {
  if (!set.has_variant(variant)) throw invalid_input_error("unknown variant " + variant);
  std::size_t good = 0;
  for (const auto& img : set.images()) {
    for (const auto& rater : set.raters()) {
      good += set.record(img, rater).verdicts.at(variant) == Verdict::good;
    }
  }
  return 100.0 * static_cast<double>(good) /
         static_cast<double>(set.raters().size() * set.images().size());
}

/// Expert choice rate: share of (image, rater) cases choosing `variant` as best, in %.
inline double ecr(const RatingSet& set, const std::string& variant) {
  if (!set.has_variant(variant)) throw invalid_input_error("unknown variant " + variant);
  std::size_t chosen = 0;
  for (const auto& img : set.images()) {
    for (const auto& rater : set.raters()) chosen += set.record(img, rater).best == variant;
  }
  return 100.0 * static_cast<double>(chosen) /
         static_cast<double>(set.raters().size() * set.images().size());
}

inline double median(std::vector<double> v) {
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// (max - min) / median of the raters' estimates for one dimension of one image.
inline double relative_deviation(std::span<const double> estimates) {
  if (estimates.empty()) throw invalid_input_error("relative deviation needs estimates");
  for (double e : estimates) {
    if (!(e > 0)) throw invalid_input_error("size estimates must be positive");
  }
  const auto [lo, hi] = std::ranges::minmax_element(estimates);
  return (*hi - *lo) / median({estimates.begin(), estimates.end()});
}

struct SizeGroundTruth {
  double height_mm = 0.0;
  double width_mm = 0.0;
};

struct ConsistencyEntry {
  std::string image;
  double height_deviation = 0.0;
  double width_deviation = 0.0;
  bool kept = false;
};

struct ConsistencyResult {
  std::vector<std::string> kept;
  std::map<std::string, SizeGroundTruth> ground_truth;  ///< kept images only
  std::vector<ConsistencyEntry> entries;                ///< every image, in rating order
};

/// Keeps an image iff the relative deviation of the raters' estimates is within
/// `threshold` for both height and width; ground truth is the mean over raters.
inline ConsistencyResult filter_consistent(const RatingSet& set,
                                           double threshold = kDefaultRelDevThreshold) {
  ConsistencyResult out;
  for (const auto& img : set.images()) {
    std::vector<double> hs, ws;
    for (const auto& rater : set.raters()) {
      const auto& r = set.record(img, rater);
      hs.push_back(r.height_mm);
      ws.push_back(r.width_mm);
    }
    ConsistencyEntry e{img, relative_deviation(hs), relative_deviation(ws), false};
    e.kept = e.height_deviation <= threshold && e.width_deviation <= threshold;
    if (e.kept) {
      out.kept.push_back(img);
      auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      out.ground_truth[img] = {mean(hs), mean(ws)};
    }
    out.entries.push_back(e);
  }
  return out;
}

struct SizePrediction {
  double height_mm = 0.0;
  double width_mm = 0.0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation; 0 for fewer than two values
};

inline MeanSd mean_sd(std::span<const double> v) {
  MeanSd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return r;
}

struct SizeErrorReport {
  std::size_t n_images = 0;
  double mae_h = 0.0;
  double mape_h = 0.0;
  double mae_w = 0.0;
  double mape_w = 0.0;
  MeanSd mph;
  MeanSd mpw;
  std::vector<std::string> warnings;
};

/// Mean absolute and mean absolute percentage error of predicted height and width against
/// ground truth, over ground-truth images that have a prediction.
inline SizeErrorReport size_errors(const std::map<std::string, SizePrediction>& pred,
                                   const std::map<std::string, SizeGroundTruth>& gt) {
  SizeErrorReport r;
  std::vector<double> hs, ws;
  for (const auto& [img, truth] : gt) {
    auto it = pred.find(img);
    if (it == pred.end()) {
      r.warnings.push_back("no prediction for image " + img + "; dropped from size errors");
      continue;
    }
    const auto& p = it->second;
    r.mae_h += std::abs(p.height_mm - truth.height_mm);
    r.mape_h += std::abs(p.height_mm - truth.height_mm) / truth.height_mm * 100.0;
    r.mae_w += std::abs(p.width_mm - truth.width_mm);
    r.mape_w += std::abs(p.width_mm - truth.width_mm) / truth.width_mm * 100.0;
    hs.push_back(p.height_mm);
    ws.push_back(p.width_mm);
  }
  r.n_images = hs.size();
  if (r.n_images > 0) {
    const auto n = static_cast<double>(r.n_images);
    r.mae_h /= n;
    r.mape_h /= n;
    r.mae_w /= n;
    r.mape_w /= n;
  }
  r.mph = mean_sd(hs);
  r.mpw = mean_sd(ws);
  return r;
}

struct VariantRow {
  std::string variant;
  double cma = 0.0;
  double ecr = 0.0;
  std::optional<SizeErrorReport> sizes;  ///< empty when no predictions were supplied
};

struct EvalReport {
  std::size_t n_images = 0;
  std::size_t n_raters = 0;
  double rel_dev_threshold = kDefaultRelDevThreshold;
  ConsistencyResult consistency;
  MeanSd gt_height;
  MeanSd gt_width;
  std::vector<VariantRow> rows;
  std::vector<std::string> warnings;
};

/// Mask-quality and size-retrieval assessment for every variant in the ratings.
inline EvalReport evaluate(const RatingSet& set,
                           const std::map<std::string, std::map<std::string, SizePrediction>>& predictions,
                           double rel_dev_threshold = kDefaultRelDevThreshold) {
  EvalReport rep;
  rep.n_images = set.images().size();
  rep.n_raters = set.raters().size();
  rep.rel_dev_threshold = rel_dev_threshold;
  if (set.raters().size() < 2) {
    rep.warnings.push_back("fewer than two raters; the consistency filter keeps every image");
  }
  rep.consistency = filter_consistent(set, rel_dev_threshold);
  std::vector<double> gh, gw;
  for (const auto& [img, g] : rep.consistency.ground_truth) {
    gh.push_back(g.height_mm);
    gw.push_back(g.width_mm);
  }
  rep.gt_height = mean_sd(gh);
  rep.gt_width = mean_sd(gw);
  for (const auto& v : set.variants()) {
    VariantRow row{v, cma(set, v), ecr(set, v), std::nullopt};
    if (auto it = predictions.find(v); it != predictions.end()) {
      row.sizes = size_errors(it->second, rep.consistency.ground_truth);
      for (const auto& w : row.sizes->warnings) rep.warnings.push_back(v + ": " + w);
    }
    rep.rows.push_back(std::move(row));
  }
  for (const auto& [v, p] : predictions) {
    if (!set.has_variant(v)) rep.warnings.push_back("predictions for unrated variant " + v + " ignored");
  }
  return rep;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  auto msd = [](const MeanSd& m) { return nlohmann::json{{"mean", m.mean}, {"sd", m.sd}}; };
  nlohmann::json j;
  j["schema"] = "eval-report/1";
  j["n_images"] = r.n_images;
  j["n_raters"] = r.n_raters;
  j["rel_dev_threshold"] = r.rel_dev_threshold;
  j["kept_images"] = r.consistency.kept;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.consistency.entries) {
    entries.push_back({{"image", e.image},
                       {"height_deviation", e.height_deviation},
                       {"width_deviation", e.width_deviation},
                       {"kept", e.kept}});
  }
  j["consistency"] = entries;
  j["gt_height_mm"] = msd(r.gt_height);
  j["gt_width_mm"] = msd(r.gt_width);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json o{{"variant", row.variant}, {"cma", row.cma}, {"ecr", row.ecr}};
    if (row.sizes) {
      const auto& s = *row.sizes;
      o["size"] = {{"n_images", s.n_images}, {"mph_mm", msd(s.mph)}, {"mae_h_mm", s.mae_h},
                   {"mape_h", s.mape_h},     {"mpw_mm", msd(s.mpw)}, {"mae_w_mm", s.mae_w},
                   {"mape_w", s.mape_w}};
    }
    rows.push_back(o);
  }
  j["variants"] = rows;
  j["warnings"] = r.warnings;
  return j;
}

/// Plain-text table: CMA and ECR over all images, size columns over the consistent subset.
inline std::string eval_report_table(const EvalReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %6s %6s | %-13s %6s %6s | %-13s %6s %6s\n", "Model", "CMA",
                "ECR", "MPH", "MAE", "MAPE", "MPW", "MAE", "MAPE");
  out += buf;
  for (const auto& row : r.rows) {
    if (row.sizes) {
      const auto& s = *row.sizes;
      char mph[32], mpw[32];
      std::snprintf(mph, sizeof mph, "%.1f ± %.1f", s.mph.mean, s.mph.sd);
      std::snprintf(mpw, sizeof mpw, "%.1f ± %.1f", s.mpw.mean, s.mpw.sd);
      std::snprintf(buf, sizeof buf, "%-16s %6.1f %6.1f | %-14s %6.1f %6.1f | %-14s %6.1f %6.1f\n",
                    row.variant.c_str(), row.cma, row.ecr, mph, s.mae_h, s.mape_h, mpw, s.mae_w,
                    s.mape_w);
    } else {
      std::snprintf(buf, sizeof buf, "%-16s %6.1f %6.1f | %-13s %6s %6s | %-13s %6s %6s\n",
                    row.variant.c_str(), row.cma, row.ecr, "-", "-", "-", "-", "-", "-");
    }
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "Images %zu (size subset %zu at rel. dev. <= %.2f), raters %zu. Mean H_GT %.1f ± "
                "%.1f mm, W_GT %.1f ± %.1f mm\n",
                r.n_images, r.consistency.kept.size(), r.rel_dev_threshold, r.n_raters,
                r.gt_height.mean, r.gt_height.sd, r.gt_width.mean, r.gt_width.sd);
  out += buf;
  return out;
}

}  // namespace woundambit
