#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "woundambit/annotate_server.hpp"
#include "woundambit/woundambit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace woundambit;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_st("woundambit");
  logger->set_pattern("%^%l%$: %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("WOUNDAMBIT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept explicit "off"
    if (level != spdlog::level::off || std::string(env) == "off") logger->set_level(level);
  }
  spdlog::set_default_logger(logger);
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& p, const std::string& text) {
  write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json parse_json_file(const fs::path& p) {
  const auto text = read_text(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw invalid_input_error(p.string() + " is not valid JSON: " + e.what());
  }
}

/// JSON goes to `out` when given, stdout otherwise.
void emit_json(const json& j, const std::string& out) {
  const auto text = j.dump(2) + "\n";
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text(out, text);
    spdlog::info("wrote {}", out);
  }
}

/// Human-readable summary: stdout when the JSON went to a file, stderr otherwise.
void emit_table(const std::string& table, const std::string& json_out) {
  std::fputs(table.c_str(), json_out.empty() ? stderr : stdout);
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext = ".png") {
  if (!fs::is_directory(dir)) throw io_error(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && (ext.empty() || e.path().extension() == ext)) out.push_back(e.path());
  }
  std::ranges::sort(out);
  return out;
}

std::pair<std::string, fs::path> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw invalid_input_error("expected NAME=PATH, got '" + s + "'");
  }
  return {s.substr(0, eq), fs::path(s.substr(eq + 1))};
}

void check_threshold(int t) {
  if (t < 0 || t > 255) throw invalid_input_error("binarization threshold must lie in [0, 255]");
}

// measure ------------------------------------------------------------------------------

struct MeasureArgs {
  std::string image, mask, layout, out, overlay;
  int threshold = kDefaultBinarizeThreshold;
  int max_bit_errors = 1;
  double step_px = 1.0;
  bool resize_mask = false;
};

int cmd_measure(const MeasureArgs& a) {
  check_threshold(a.threshold);
  MeasureOptions opts;
  if (!a.layout.empty()) opts.layout = layout_from_json(parse_json_file(a.layout));
  const int limit = (builtin_dictionary().min_hamming() - 1) / 2;
  if (a.max_bit_errors < 0 || a.max_bit_errors > limit) {
    throw invalid_input_error("--max-bit-errors must lie in [0, " + std::to_string(limit) + "]");
  }
  if (!(a.step_px > 0)) throw invalid_input_error("--step must be positive");
  opts.detection.max_bit_errors = a.max_bit_errors;
  opts.step_px = a.step_px;
  opts.resize_mask = a.resize_mask;

  const auto photo = read_png_rgb(a.image);
  auto mask = read_mask_png(a.mask, a.threshold);
  const auto result = run_measurement(photo, std::move(mask), opts);
  for (const auto& w : result.warnings) spdlog::warn("{}", w);
  spdlog::info("{} markers, {:.4f} px/mm ({})", result.markers.size(), result.scale.px_per_mm,
               to_string(result.scale.method));

  auto j = measurement_to_json(result);
  j["image"] = fs::path(a.image).stem().string();
  emit_json(j, a.out);
  if (!a.overlay.empty()) {
    write_png(a.overlay, render_measurement_overlay(photo, result.markers, result.measurements));
    spdlog::info("wrote overlay {}", a.overlay);
  }
  return 0;
}

// metrics ------------------------------------------------------------------------------

int cmd_metrics(const std::string& pred_dir, const std::string& gt_dir, int threshold,
                const std::string& out) {
  check_threshold(threshold);
  std::map<std::string, fs::path> gts;
  for (const auto& p : list_files(gt_dir)) gts[p.stem().string()] = p;
  ConfusionCounts acc;
  json images = json::array();
  std::size_t n = 0;
  for (const auto& p : list_files(pred_dir)) {
    auto it = gts.find(p.stem().string());
    if (it == gts.end()) {
      spdlog::warn("no ground truth for {}; skipped", p.filename().string());
      continue;
    }
    const auto pred = read_mask_png(p, threshold);
    const auto gt = read_mask_png(it->second, threshold);
    ConfusionCounts c;
    try {
      c = accumulate(pred, gt);
    } catch (const invalid_input_error& e) {
      throw invalid_input_error(p.stem().string() + ": " + e.what());
    }
    acc += c;
    images.push_back({{"image", p.stem().string()}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
    gts.erase(it);
    ++n;
  }
  for (const auto& [stem, path] : gts) spdlog::warn("no prediction for {}; skipped", stem);
  if (n == 0) throw invalid_input_error("no prediction/ground-truth pairs share a file stem");
  const auto rep = finalize(acc);
  if (rep.degenerate) spdlog::warn("a metric denominator was zero; defined as 1.0");
  json j{{"schema", "metrics/1"},
         {"n_images", n},
         {"counts", {{"tp", acc.tp}, {"fp", acc.fp}, {"fn", acc.fn}, {"tn", acc.tn}}},
         {"miou", rep.miou},
         {"mdsc", rep.mdsc},
         {"mprc", rep.mprc},
         {"mrec", rep.mrec},
         {"degenerate", rep.degenerate},
         {"table", rep.table_row()},
         {"images", images}};
  emit_json(j, out);
  emit_table(rep.table_row() + "\n", out);
  return 0;
}

// ensemble -----------------------------------------------------------------------------

int cmd_ensemble(const std::vector<std::string>& inputs, const std::vector<std::string>& in_dirs,
                 const std::string& out, const std::string& out_dir, int threshold) {
  check_threshold(threshold);
  auto vote = [](const std::vector<BinaryMask>& masks, const std::string& what) {
    auto r = majority_vote(masks);
    for (const auto& w : r.warnings) spdlog::warn("{}: {}", what, w);
    return r.mask;
  };
  if (!inputs.empty()) {
    if (out.empty()) throw invalid_input_error("--in requires --out");
    std::vector<BinaryMask> masks;
    for (const auto& p : inputs) masks.push_back(read_mask_png(p, threshold));
    write_mask_png(out, vote(masks, out));
    spdlog::info("wrote {} from {} masks", out, masks.size());
    return 0;
  }
  if (in_dirs.empty()) throw invalid_input_error("give --in FILE... or --in-dir DIR...");
  if (out_dir.empty()) throw invalid_input_error("--in-dir requires --out-dir");
  std::vector<std::map<std::string, fs::path>> sets;
  for (const auto& d : in_dirs) {
    auto& s = sets.emplace_back();
    for (const auto& p : list_files(d)) s[p.stem().string()] = p;
  }
  fs::create_directories(out_dir);
  std::size_t written = 0;
  for (const auto& [stem, first] : sets.front()) {
    std::vector<BinaryMask> masks;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      auto it = sets[i].find(stem);
      if (it == sets[i].end()) throw invalid_input_error("mask " + stem + " missing from " + in_dirs[i]);
      masks.push_back(read_mask_png(it->second, threshold));
    }
    write_mask_png(fs::path(out_dir) / (stem + ".png"), vote(masks, stem));
    ++written;
  }
  for (std::size_t i = 1; i < sets.size(); ++i) {
    for (const auto& [stem, p] : sets[i]) {
      if (!sets.front().contains(stem)) spdlog::warn("mask {} only in {}; skipped", stem, in_dirs[i]);
    }
  }
  spdlog::info("wrote {} ensembled masks to {}", written, out_dir);
  return 0;
}

// dedup --------------------------------------------------------------------------------

inline constexpr const char* kQuarantineDir = "quarantine";

int cmd_dedup(const std::string& dir, int threshold, const std::string& report_path, bool apply) {
  const auto files = list_files(dir, "");
  std::vector<DedupItem> items;
  for (const auto& f : files) {
    DedupItem it;
    it.id = f.filename().string();
    try {
      it.bytes = read_file_bytes(f);
      it.image = decode_png_gray(it.bytes, it.id);
    } catch (const std::exception& e) {
      it.error = e.what();
    }
    items.push_back(std::move(it));
  }
  const auto rep = dedup(items, threshold);
  for (const auto& e : rep.errors) spdlog::warn("{}: {}", e.id, e.message);

  if (apply && !rep.duplicates.empty()) {
    const auto q = fs::path(dir) / kQuarantineDir;
    fs::create_directories(q);
    for (const auto& d : rep.duplicates) fs::rename(fs::path(dir) / d.duplicate, q / d.duplicate);
  }

  json dups = json::array();
  for (const auto& d : rep.duplicates) {
    dups.push_back({{"duplicate", d.duplicate}, {"kept", d.kept}, {"reason", d.reason}, {"distance", d.distance}});
  }
  json errors = json::array();
  for (const auto& e : rep.errors) errors.push_back({{"file", e.id}, {"message", e.message}});
  json hashes = json::object();
  for (const auto& i : items) {
    if (auto h = rep.hashes.find(i.id); h != rep.hashes.end()) hashes[i.id] = h->second.hex();
  }
  json j{{"schema", "dedup-report/1"}, {"threshold", threshold}, {"n_files", items.size()},
         {"kept", rep.kept}, {"duplicates", dups}, {"errors", errors}, {"hashes", hashes},
         {"applied", apply}};
  emit_json(j, report_path);
  char line[128];
  std::snprintf(line, sizeof line, "%zu files, %zu kept, %zu duplicates, %zu errors%s\n", items.size(),
                rep.kept.size(), rep.duplicates.size(), rep.errors.size(),
                apply ? " (duplicates moved to quarantine/)" : " (dry run)");
  emit_table(line, report_path);
  return 0;
}

// eval ---------------------------------------------------------------------------------

std::map<std::string, SizePrediction> load_predictions(const fs::path& path, const std::string& variant) {
  std::map<std::string, SizePrediction> out;
  auto add = [&](const std::string& image, const json& doc) {
    if (auto p = prediction_from_measurement(doc)) {
      out[image] = *p;
    } else {
      spdlog::warn("{}: measurement for {} lists no wound", variant, image);
    }
  };
  if (fs::is_directory(path)) {
    for (const auto& f : list_files(path, ".json")) add(f.stem().string(), parse_json_file(f));
  } else {
    const auto doc = parse_json_file(path);
    if (!doc.is_object()) throw invalid_input_error(path.string() + " must map image ids to measurements");
    for (const auto& [image, m] : doc.items()) add(image, m);
  }
  return out;
}

int cmd_eval(const std::string& ratings, const std::vector<std::string>& measurements, double rel_dev,
             const std::string& out) {
  if (!(rel_dev >= 0)) throw invalid_input_error("--rel-dev-threshold must be non-negative");
  RatingSet set(ratings_from_json(parse_json_file(ratings)));
  std::map<std::string, std::map<std::string, SizePrediction>> preds;
  for (const auto& m : measurements) {
    auto [variant, path] = split_assignment(m);
    preds[variant] = load_predictions(path, variant);
  }
  const auto rep = evaluate(set, preds, rel_dev);
  for (const auto& w : rep.warnings) spdlog::warn("{}", w);
  if (!out.empty()) emit_json(eval_report_to_json(rep), out);
  std::fputs(eval_report_table(rep).c_str(), stdout);
  return 0;
}

// gen-ro -------------------------------------------------------------------------------

int cmd_gen_ro(double dpi, const std::string& layout_in, const std::string& out,
               const std::string& layout_out) {
  if (!(dpi >= 72 && dpi <= 2400)) throw invalid_input_error("--dpi must lie in [72, 2400]");
  const auto layout = layout_in.empty() ? ReferenceLayout::default_layout()
                                        : layout_from_json(parse_json_file(layout_in));
  ReferenceSheet sheet(layout, builtin_dictionary());
  const double ppm = dpi / 25.4;
  const auto img = render_sheet(sheet, ppm);
  write_png(out, img);
  if (!layout_out.empty()) write_text(layout_out, layout_to_json(layout).dump(2) + "\n");
  const auto size = sheet.size_mm();
  std::printf("reference sheet %.1f x %.1f mm, %d x %d px at %.0f dpi; print at 100%% scale\n", size.x,
              size.y, img.width(), img.height(), dpi);
  return 0;
}

// annotate -----------------------------------------------------------------------------

AnnotateServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_annotate(const std::string& images, const std::vector<std::string>& masks, const std::string& host,
                 int port, std::uint64_t seed, const std::string& ratings, const std::string& ui_dir,
                 int threshold) {
  check_threshold(threshold);
  if (port < 0 || port > 65535) throw invalid_input_error("--port must lie in [0, 65535]");
  AnnotateConfig cfg;
  cfg.images_dir = images;
  for (const auto& m : masks) cfg.variant_dirs.push_back(split_assignment(m));
  cfg.ratings_path = ratings;
  if (!ui_dir.empty()) cfg.ui_dir = ui_dir;
  cfg.seed = seed;
  cfg.mask_threshold = threshold;
  AnnotationStore store(cfg);
  AnnotateServer server(store);
  const int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("serving %zu images x %zu masks on http://%s:%d/\n", store.images().size(),
              store.variants().size(), host.c_str(), bound);
  std::fflush(stdout);
  server.serve();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Wound size measurement from segmentation masks and a printed marker sheet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "woundambit 1.0.0");
  app.footer("Exit codes: 0 ok, 2 invalid input, 3 no reference marker found, 4 I/O error.\n"
             "Set WOUNDAMBIT_LOG=trace|debug|info|warn|error|off for diagnostics on stderr.");

  MeasureArgs ma;
  auto* measure = app.add_subcommand("measure", "Measure wounds in a photo from its mask");
  measure->add_option("--image", ma.image, "Photo (PNG) showing the reference sheet")->required();
  measure->add_option("--mask", ma.mask, "Wound mask (PNG)")->required();
  measure->add_option("--layout", ma.layout, "Reference layout JSON (default: built-in sheet)");
  measure->add_option("--out", ma.out, "Write measurement JSON here instead of stdout");
  measure->add_option("--overlay", ma.overlay, "Write a visualisation PNG");
  measure->add_option("--threshold", ma.threshold, "Mask binarization threshold")->capture_default_str();
  measure->add_option("--max-bit-errors", ma.max_bit_errors, "Marker bit errors to correct")->capture_default_str();
  measure->add_option("--step", ma.step_px, "Width sweep step along the diagonal (px)")->capture_default_str();
  measure->add_flag("--resize-mask", ma.resize_mask, "Resize a mismatched mask to the photo (nearest)");

  std::string pred_dir, gt_dir, metrics_out;
  int metrics_threshold = kDefaultBinarizeThreshold;
  auto* metrics = app.add_subcommand("metrics", "Micro-averaged IoU, Dice, precision, recall");
  metrics->add_option("--pred-dir", pred_dir, "Predicted masks")->required();
  metrics->add_option("--gt-dir", gt_dir, "Ground-truth masks, paired by file stem")->required();
  metrics->add_option("--threshold", metrics_threshold, "Mask binarization threshold")->capture_default_str();
  metrics->add_option("--out", metrics_out, "Write JSON here instead of stdout");

  std::vector<std::string> ens_in, ens_dirs;
  std::string ens_out, ens_out_dir;
  int ens_threshold = kDefaultBinarizeThreshold;
  auto* ensemble = app.add_subcommand("ensemble", "Pixel-wise majority vote over masks");
  auto* in_opt = ensemble->add_option("--in", ens_in, "Mask files to vote over");
  auto* dir_opt = ensemble->add_option("--in-dir", ens_dirs, "Mask directories, paired by file stem");
  in_opt->excludes(dir_opt);
  ensemble->add_option("--out", ens_out, "Output mask (with --in)");
  ensemble->add_option("--out-dir", ens_out_dir, "Output directory (with --in-dir)");
  ensemble->add_option("--threshold", ens_threshold, "Mask binarization threshold")->capture_default_str();

  std::string dedup_dir, dedup_report;
  int dedup_threshold = kDefaultDedupThreshold;
  bool dedup_apply = false;
  auto* dd = app.add_subcommand("dedup", "Find exact and perceptual duplicates in a directory");
  dd->add_option("--dir", dedup_dir, "Directory of images")->required();
  dd->add_option("--threshold", dedup_threshold, "Maximum hash Hamming distance")->capture_default_str();
  dd->add_option("--report", dedup_report, "Write report JSON here instead of stdout");
  dd->add_flag("--apply", dedup_apply, "Move duplicates into <dir>/quarantine (default: dry run)");

  std::string ratings;
  std::vector<std::string> measurements;
  double rel_dev = kDefaultRelDevThreshold;
  std::string eval_out;
  auto* ev = app.add_subcommand("eval", "Score expert ratings and size predictions");
  ev->add_option("--ratings", ratings, "Ratings file (ratings/1)")->required();
  ev->add_option("--measurements", measurements,
                 "VARIANT=PATH, PATH a directory of <image>.json or a JSON object image -> measurement");
  ev->add_option("--rel-dev-threshold", rel_dev, "Inter-rater consistency threshold")->capture_default_str();
  ev->add_option("--out", eval_out, "Write eval-report JSON");

  double dpi = 300;
  std::string ro_layout, ro_out, ro_layout_out;
  auto* ro = app.add_subcommand("gen-ro", "Render the printable reference sheet");
  ro->add_option("--dpi", dpi, "Print resolution")->capture_default_str();
  ro->add_option("--layout", ro_layout, "Layout JSON (default: built-in sheet)");
  ro->add_option("--out", ro_out, "Output PNG")->required();
  ro->add_option("--layout-out", ro_layout_out, "Also write the layout JSON");

  std::string an_images, an_ratings = "ratings.json", an_ui, an_host = "127.0.0.1";
  std::vector<std::string> an_masks;
  int an_port = 8000, an_threshold = kDefaultBinarizeThreshold;
  std::uint64_t an_seed = 0;
  auto* an = app.add_subcommand("annotate", "Serve the blind mask-rating tool");
  an->add_option("--images", an_images, "Directory of photos (PNG)")->required();
  an->add_option("--masks", an_masks, "VARIANT=DIR of masks named like the photos")->required();
  an->add_option("--ratings", an_ratings, "Ratings file to append to")->capture_default_str();
  an->add_option("--port", an_port, "Port (0 picks a free one)")->capture_default_str();
  an->add_option("--host", an_host, "Bind address")->capture_default_str();
  an->add_option("--seed", an_seed, "Presentation-order seed")->capture_default_str();
  an->add_option("--ui-dir", an_ui, "Built UI bundle to serve at /");
  an->add_option("--threshold", an_threshold, "Mask binarization threshold")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(exit_code::invalid_input);
  }

  try {
    if (*measure) return cmd_measure(ma);
    if (*metrics) return cmd_metrics(pred_dir, gt_dir, metrics_threshold, metrics_out);
    if (*ensemble) return cmd_ensemble(ens_in, ens_dirs, ens_out, ens_out_dir, ens_threshold);
    if (*dd) return cmd_dedup(dedup_dir, dedup_threshold, dedup_report, dedup_apply);
    if (*ev) return cmd_eval(ratings, measurements, rel_dev, eval_out);
    if (*ro) return cmd_gen_ro(dpi, ro_layout, ro_out, ro_layout_out);
    if (*an) {
      return cmd_annotate(an_images, an_masks, an_host, an_port, an_seed, an_ratings, an_ui, an_threshold);
    }
  } catch (const no_reference_error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(exit_code::no_reference);
  } catch (const invalid_input_error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(exit_code::invalid_input);
  } catch (const io_error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(exit_code::io);
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(exit_code::io);
  } catch (const json::exception& e) {
    spdlog::error("malformed JSON input: {}", e.what());
    return static_cast<int>(exit_code::invalid_input);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
