#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "woundambit/error.hpp"
#include "woundambit/expert_eval.hpp"
#include "woundambit/mask.hpp"
#include "woundambit/overlay.hpp"
#include "woundambit/png_io.hpp"

// Local annotation service: serves the rating UI, a blinded task list, mask overlays, and
// an append-only ratings file in the ratings/1 format.

namespace woundambit {

struct AnnotateConfig {
  std::filesystem::path images_dir;
  /// (variant name, directory of masks named like the images)
  std::vector<std::pair<std::string, std::filesystem::path>> variant_dirs;
  std::filesystem::path ratings_path;
  std::optional<std::filesystem::path> ui_dir;
  std::uint64_t seed = 0;
  int mask_threshold = kDefaultBinarizeThreshold;
};

struct SubmitOutcome {
  int status = 200;
  std::string message;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Fisher-Yates driven by raw mt19937_64 output, so orders are identical across standard
/// library implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace detail

/// Task list, blinding tokens and ratings persistence, independent of HTTP.
class AnnotationStore {
 public:
  explicit AnnotationStore(AnnotateConfig cfg) : cfg_(std::move(cfg)) {
    namespace fs = std::filesystem;
    if (cfg_.variant_dirs.empty()) throw invalid_input_error("annotate needs at least one mask variant");
    if (!fs::is_directory(cfg_.images_dir)) {
      throw io_error("image directory " + cfg_.images_dir.string() + " does not exist");
    }
    for (const auto& entry : fs::directory_iterator(cfg_.images_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") {
        images_.push_back(entry.path().stem().string());
      }
    }
    std::ranges::sort(images_);
    if (images_.empty()) throw invalid_input_error("image directory holds no PNG files");
    for (const auto& [variant, dir] : cfg_.variant_dirs) {
      variants_.push_back(variant);
      for (const auto& img : images_) {
        if (!fs::is_regular_file(dir / (img + ".png"))) {
          throw invalid_input_error("variant " + variant + " has no mask for image " + img);
        }
      }
    }
    if (std::set<std::string>(variants_.begin(), variants_.end()).size() != variants_.size()) {
      throw invalid_input_error("variant names must be unique");
    }

    std::mt19937_64 rng(cfg_.seed);
    order_ = images_;
    detail::seeded_shuffle(order_, rng);
    for (const auto& img : order_) {
      std::vector<std::string> vs = variants_;
      detail::seeded_shuffle(vs, rng);
      auto& tokens = tokens_[img];
      for (const auto& v : vs) {
        char buf[17];
        const auto h = detail::splitmix64(cfg_.seed ^ detail::fnv1a(img) ^
                                          detail::splitmix64(detail::fnv1a(v)));
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        tokens.emplace_back(buf, v);
      }
    }

    file_.variants = variants_;
    if (fs::exists(cfg_.ratings_path)) {
      const auto bytes = read_file_bytes(cfg_.ratings_path);
      auto loaded = ratings_from_json(nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, true, true));
      if (std::set<std::string>(loaded.variants.begin(), loaded.variants.end()) !=
          std::set<std::string>(variants_.begin(), variants_.end())) {
        throw invalid_input_error("existing ratings file " + cfg_.ratings_path.string() +
                                  " rates a different set of variants");
      }
      file_.raters = loaded.raters;
      file_.records = loaded.records;
    }
  }

  const std::vector<std::string>& images() const noexcept { return images_; }
  const std::vector<std::string>& variants() const noexcept { return variants_; }

  /// Tasks in presentation order. Masks carry opaque tokens only.
  nlohmann::json tasks_json(const std::string& rater = {}) const {
    std::lock_guard lock(mutex_);
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& img : order_) {
      nlohmann::json masks = nlohmann::json::array();
      for (const auto& [token, variant] : tokens_.at(img)) {
        masks.push_back({{"token", token}, {"overlay_url", "/api/overlay/" + img + "/" + token}});
      }
      nlohmann::json t{{"image", img}, {"image_url", "/api/image/" + img}, {"masks", masks}};
      if (!rater.empty()) t["done"] = has_record(img, rater);
      tasks.push_back(t);
    }
    return {{"tasks", tasks}, {"n_images", images_.size()}, {"n_masks_per_image", variants_.size()}};
  }

  /// Validates a submission, maps tokens to variants and appends the record.
  SubmitOutcome submit(const nlohmann::json& body) {
    RatingRecord rec;
    try {
      rec.rater = body.at("rater").get<std::string>();
      rec.image = body.at("image").get<std::string>();
      if (rec.rater.empty()) return {400, "rater must not be empty"};
      auto it = tokens_.find(rec.image);
      if (it == tokens_.end()) return {400, "unknown image " + rec.image};
      std::map<std::string, std::string> by_token(it->second.begin(), it->second.end());
      const auto& verdicts = body.at("verdicts");
      if (!verdicts.is_object() || verdicts.size() != by_token.size()) {
        return {400, "verdicts must cover every mask of the image"};
      }
      for (const auto& [token, verdict] : verdicts.items()) {
        auto v = by_token.find(token);
        if (v == by_token.end()) return {400, "unknown mask token " + token};
        const auto s = verdict.get<std::string>();
        if (s != "good" && s != "bad") return {400, "verdict must be good or bad"};
        rec.verdicts[v->second] = s == "good" ? Verdict::good : Verdict::bad;
      }
      const auto best = body.at("best").get<std::string>();
      auto b = by_token.find(best);
      if (b == by_token.end()) return {400, "best must be one of the image's mask tokens"};
      rec.best = b->second;
      rec.height_mm = body.at("height_mm").get<double>();
      rec.width_mm = body.at("width_mm").get<double>();
      if (!(rec.height_mm > 0) || !(rec.width_mm > 0)) return {400, "height_mm and width_mm must be positive"};
    } catch (const nlohmann::json::exception& e) {
      return {400, std::string("malformed rating: ") + e.what()};
    }

    std::lock_guard lock(mutex_);
    if (has_record(rec.image, rec.rater)) {
      return {409, "rating for image " + rec.image + " by " + rec.rater + " already stored"};
    }
    RatingsFile next = file_;
    next.records.push_back(rec);
    if (std::ranges::find(next.raters, rec.rater) == next.raters.end()) next.raters.push_back(rec.rater);
    persist(next);
    file_ = std::move(next);
    return {200, "stored"};
  }

  RatingsFile ratings() const {
    std::lock_guard lock(mutex_);
    return file_;
  }

  std::optional<std::vector<std::uint8_t>> image_png(const std::string& image) const {
    if (!tokens_.contains(image)) return std::nullopt;
    return read_file_bytes(cfg_.images_dir / (image + ".png"));
  }

  std::optional<std::vector<std::uint8_t>> overlay_png(const std::string& image,
                                                       const std::string& token) const {
    auto it = tokens_.find(image);
    if (it == tokens_.end()) return std::nullopt;
    auto v = std::ranges::find(it->second, token, &std::pair<std::string, std::string>::first);
    if (v == it->second.end()) return std::nullopt;
    const auto dir = std::ranges::find(cfg_.variant_dirs, v->second,
                                       &std::pair<std::string, std::filesystem::path>::first)->second;
    const auto photo = read_png_rgb(cfg_.images_dir / (image + ".png"));
    auto mask = read_mask_png(dir / (image + ".png"), cfg_.mask_threshold);
    if (!mask.same_shape(BinaryMask(photo.width(), photo.height()))) {
      mask = resize_nearest(mask, photo.width(), photo.height());
    }
    return encode_png(render_mask_overlay(photo, mask));
  }

  const AnnotateConfig& config() const noexcept { return cfg_; }

 private:
  bool has_record(const std::string& image, const std::string& rater) const {
    return std::ranges::any_of(file_.records, [&](const RatingRecord& r) {
      return r.image == image && r.rater == rater;
    });
  }

  void persist(const RatingsFile& f) const {
    const auto tmp = cfg_.ratings_path.string() + ".tmp";
    const auto text = ratings_to_json(f).dump(2) + "\n";
    write_file_bytes(tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    std::error_code ec;
    std::filesystem::rename(tmp, cfg_.ratings_path, ec);
    if (ec) throw io_error("cannot replace " + cfg_.ratings_path.string() + ": " + ec.message());
  }

  AnnotateConfig cfg_;
  std::vector<std::string> images_;
  std::vector<std::string> variants_;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> tokens_;  // token, variant
  mutable std::mutex mutex_;
  RatingsFile file_;
};

inline constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Wound mask annotation</title></head>
<body><h1>Wound mask annotation</h1>
<p>The rating UI bundle is not installed. Start the server with --ui-dir pointing at the built
bundle, or use the JSON API directly:</p>
<ul><li>GET /api/tasks?rater=NAME</li><li>GET /api/image/{image}</li>
<li>GET /api/overlay/{image}/{token}</li><li>POST /api/ratings</li></ul>
</body></html>
)";

/// HTTP front end over an AnnotationStore.
class AnnotateServer {
 public:
  explicit AnnotateServer(AnnotationStore& store) : store_(store) {
    auto json_reply = [](httplib::Response& res, int status, const nlohmann::json& j) {
      res.status = status;
      res.set_content(j.dump(), "application/json");
    };
    server_.Get("/api/tasks", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
      json_reply(res, 200, store_.tasks_json(req.has_param("rater") ? req.get_param_value("rater") : ""));
    });
    server_.Get(R"(/api/image/([^/]+))", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
      auto png = store_.image_png(req.matches[1]);
      if (!png) return json_reply(res, 404, {{"error", "unknown image"}});
      res.set_content(std::string(png->begin(), png->end()), "image/png");
    });
    server_.Get(R"(/api/overlay/([^/]+)/([^/]+))",
                [this, json_reply](const httplib::Request& req, httplib::Response& res) {
                  try {
                    auto png = store_.overlay_png(req.matches[1], req.matches[2]);
                    if (!png) return json_reply(res, 404, {{"error", "unknown image or mask token"}});
                    res.set_content(std::string(png->begin(), png->end()), "image/png");
                  } catch (const std::exception& e) {
                    json_reply(res, 500, {{"error", e.what()}});
                  }
                });
    server_.Post("/api/ratings", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        return json_reply(res, 400, {{"error", std::string("body is not JSON: ") + e.what()}});
      }
      try {
        const auto outcome = store_.submit(body);
        if (outcome.status == 200) return json_reply(res, 200, {{"ok", true}});
        json_reply(res, outcome.status, {{"error", outcome.message}});
      } catch (const std::exception& e) {
        json_reply(res, 500, {{"error", e.what()}});
      }
    });
    const auto& ui = store_.config().ui_dir;
    if (ui && std::filesystem::is_directory(*ui)) {
      server_.set_mount_point("/", ui->string());
    } else {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html");
      });
    }
  }

  /// Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw io_error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    return bound;
  }

  /// Blocks until stop() is called.
  void serve() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  AnnotationStore& store_;
  httplib::Server server_;
};

}  // namespace woundambit
