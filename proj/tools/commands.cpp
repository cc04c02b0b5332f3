#include "commands.hpp"

#include <png.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include "curb/anchor_codec.hpp"
#include "curb/config.hpp"
#include "curb/errors.hpp"
#include "curb/eval.hpp"
#include "curb/pipeline.hpp"
#include "curb/postprocess.hpp"
#include "curb/rng.hpp"
#include "curb/synth.hpp"
#include "curb/visibility.hpp"

namespace curb::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class MissingInput : public Error {
 public:
  using Error::Error;
};

bool quiet() {
  const char* level = std::getenv("CURB_LOG");
  return level != nullptr && (std::string(level) == "quiet" || std::string(level) == "error");
}

void info(const std::string& msg) {
  if (!quiet()) std::cerr << msg << '\n';
}

void require(const fs::path& p) {
  if (!fs::exists(p)) throw MissingInput("missing input: " + p.string());
}

std::string frame_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

/// Sorted frame indices of files named NNNN.<suffix> in `dir`.
std::vector<std::size_t> frames_in(const fs::path& dir, const std::string& suffix) {
  require(dir);
  const std::regex pattern("([0-9]+)\\." + std::regex_replace(suffix, std::regex("\\."), "\\.") + "$");
  std::vector<std::size_t> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.push_back(std::stoul(m[1].str()));
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw MissingInput("no *." + suffix + " files in " + dir.string());
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled independently, so the outputs do not depend on the worker count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  os << j.dump(2) << '\n';
  if (!os) throw Error("failed to write " + path.string());
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<RegionSize> parse_regions(const std::string& s) {
  std::vector<RegionSize> out;
  std::stringstream ss(s);
  std::string item;
  const std::regex pattern("([0-9]+)x([0-9]+)");
  while (std::getline(ss, item, ',')) {
    std::smatch m;
    if (!std::regex_match(item, m, pattern)) throw ConfigError("bad region '" + item + "', expected WxH");
    out.push_back({std::stoi(m[1].str()), std::stoi(m[2].str())});
  }
  return out;
}

void write_png(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr)) {
    throw Error("failed to write " + path.string() + ": " + image.message);
  }
}

// Shared flags and the effective config of one invocation.
struct Context {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  PipelineConfig cfg;

  /// Loads the config file, then applies --seed and any command overrides.
  void resolve(const std::function<void(PipelineConfig&)>& overrides = {}) {
    if (!config_path.empty()) {
      require(config_path);
      cfg = load_config(config_path);
    }
    if (seed) cfg.seed = *seed;
    if (overrides) overrides(cfg);
    cfg.propagate();
    cfg.validate();
    if (threads < 1) throw ConfigError("--threads must be >= 1");
  }

  fs::path out_dir() const {
    if (out.empty()) throw ConfigError("--out is required");
    fs::create_directories(out);
    return out;
  }

  void save_effective(const fs::path& dir) const { write_json(dir / "effective_config.json", config_to_json(cfg)); }
};

void cmd_synth_gen(Context& ctx, std::optional<int> frames) {
  ctx.resolve([&](PipelineConfig& c) {
    if (frames) c.sequence.n_frames = *frames;
  });
  const fs::path dir = ctx.out_dir();
  const SceneSpec scene = generate_scene(ctx.cfg.seed, ctx.cfg.scene);
  const Sequence seq = generate_sequence(scene, ctx.cfg.sequence, derive_seed(ctx.cfg.seed, 1));
  write_sequence(dir, seq);
  ctx.save_effective(dir);
  info("wrote " + std::to_string(seq.scans.size()) + " frames to " + dir.string());
}

Sequence load_sequence(const fs::path& dir) {
  require(dir / "meta.json");
  return read_sequence(dir);
}

void cmd_build_bev(Context& ctx, const std::string& seq_dir) {
  ctx.resolve();
  const Sequence seq = load_sequence(seq_dir);
  const fs::path dir = ctx.out_dir();
  const auto& c = ctx.cfg;
  parallel_for(seq.scans.size(), ctx.threads, [&](std::size_t i) {
    const BevImage bev = build_bev(seq.scans, seq.trajectory, seq.scans[i].timestamp, c.grid, c.trim, c.window);
    write_bev(dir / (frame_name(i) + ".bev"), bev);
  });
  ctx.save_effective(dir);
  info("wrote " + std::to_string(seq.scans.size()) + " BEV images to " + dir.string());
}

void cmd_label(Context& ctx, const std::string& seq_dir) {
  ctx.resolve();
  require(fs::path(seq_dir) / "scene.json");
  const Sequence seq = load_sequence(seq_dir);
  const fs::path dir = ctx.out_dir();
  const auto& c = ctx.cfg;
  parallel_for(seq.scans.size(), ctx.threads, [&](std::size_t i) {
    const Micros t = seq.scans[i].timestamp;
    const CurbMask curb = ground_truth_labels(seq.scene, seq.trajectory.interpolate_at(t), c.grid).curb;
    std::vector<LidarScan> trimmed;
    for (std::size_t k : select_window(seq.scans, t, c.window)) trimmed.push_back(trim_scan(seq.scans[k], c.trim));
    const CurbMask obstacles = obstacle_mask(integrate_scans(trimmed, seq.trajectory, t), c.grid, c.obstacle_band);
    const VisibilityPartition part = partition_labels(curb, obstacles);
    write_pgm(dir / (frame_name(i) + ".curb.pgm"), curb);
    write_pgm(dir / (frame_name(i) + ".visible.pgm"), part.visible);
    write_pgm(dir / (frame_name(i) + ".occluded.pgm"), part.occluded);
  });
  ctx.save_effective(dir);
  info("labelled " + std::to_string(seq.scans.size()) + " frames into " + dir.string());
}

void cmd_encode(Context& ctx, const std::string& mask_dir, const std::string& suffix) {
  ctx.resolve();
  const auto frames = frames_in(mask_dir, suffix + ".pgm");
  const fs::path dir = ctx.out_dir();
  parallel_for(frames.size(), ctx.threads, [&](std::size_t k) {
    const std::string stem = frame_name(frames[k]);
    const CurbMask mask = read_pgm(fs::path(mask_dir) / (stem + "." + suffix + ".pgm"), ctx.cfg.grid.resolution);
    write_anchor_grids(dir / (stem + ".anchors.json"), encode_mask(threshold(mask, 0.5f), ctx.cfg.anchors));
  });
  ctx.save_effective(dir);
  info("encoded " + std::to_string(frames.size()) + " masks into " + dir.string());
}

json training_record(const TrainConfig& t, const std::vector<EpochLog>& logs, const std::vector<int>& scales) {
  json epochs = json::array();
  for (const auto& l : logs) epochs.push_back({{"epoch", l.epoch}, {"mean_loss", l.mean_loss}});
  return {{"lr", t.lr},
          {"optimizer", t.optimizer.kind == nn::OptimizerConfig::Kind::Adam ? "adam" : "sgd"},
          {"momentum", t.optimizer.momentum},
          {"alpha", t.alpha},
          {"seed", t.seed},
          {"epochs", t.epochs},
          {"batch", t.batch},
          {"scales", scales},
          {"history", epochs}};
}

EpochCallback epoch_logger(const std::string& name) {
  return [name](const EpochLog& l) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s epoch %d loss %.5f", name.c_str(), l.epoch + 1, l.mean_loss);
    info(buf);
  };
}

void cmd_train_visible(Context& ctx, std::optional<int> epochs) {
  ctx.resolve([&](PipelineConfig& c) {
    if (epochs) c.train_visible.epochs = *epochs;
  });
  const fs::path dir = ctx.out_dir();
  const auto data = make_dataset(ctx.cfg.dataset, ctx.cfg.seed);
  nn::VisibleNet<float> net(ctx.cfg.models.visible, derive_seed(ctx.cfg.seed, 101));
  const auto logs = train_visible(net, data, ctx.cfg.train_visible, epoch_logger("visible"));
  nn::save_checkpoint(dir / "visible.crbn", net.descriptor(), net.parameters());
  write_json(dir / "visible.train.json", training_record(ctx.cfg.train_visible, logs, {}));
  ctx.save_effective(dir);
}

void cmd_train_occluded(Context& ctx, std::optional<int> epochs, const std::string& visible_model) {
  ctx.resolve([&](PipelineConfig& c) {
    if (epochs) c.train_occluded.epochs = *epochs;
  });
  if (!visible_model.empty()) require(visible_model);
  const fs::path dir = ctx.out_dir();
  auto data = make_dataset(ctx.cfg.dataset, ctx.cfg.seed);
  if (!visible_model.empty()) {
    use_predicted_visible(data, nn::load_visible_net(visible_model), ctx.cfg.infer.visible_threshold);
  }
  nn::OccludedNet<float> net(ctx.cfg.models.occluded, derive_seed(ctx.cfg.seed, 102));
  const auto logs = train_occluded(net, data, ctx.cfg.train_occluded, ctx.cfg.anchors, epoch_logger("occluded"));
  nn::save_checkpoint(dir / "occluded.crbn", net.descriptor(), net.parameters());
  write_json(dir / "occluded.train.json", training_record(ctx.cfg.train_occluded, logs, ctx.cfg.anchors.cell_sizes));
  ctx.save_effective(dir);
}

void cmd_infer(Context& ctx, const std::string& seq_dir, const std::string& visible_model,
               const std::string& occluded_model) {
  ctx.resolve();
  require(visible_model);
  require(occluded_model);
  const Sequence seq = load_sequence(seq_dir);
  const auto vis = nn::load_visible_net(visible_model);
  const auto occ = nn::load_occluded_net(occluded_model);
  if (occ.config().cell_sizes != ctx.cfg.anchors.cell_sizes) {
    throw ConfigError("occluded model scales differ from the configured anchor scales");
  }
  const fs::path dir = ctx.out_dir();
  const auto& c = ctx.cfg;
  parallel_for(seq.scans.size(), ctx.threads, [&](std::size_t i) {
    nn::NoGradGuard no_grad;
    const BevImage bev = build_bev(seq.scans, seq.trajectory, seq.scans[i].timestamp, c.grid, c.trim, c.window);
    const Inference r = infer_bev(vis, occ, bev, c.infer);
    const std::string stem = frame_name(i);
    write_pgm(dir / (stem + ".visible.pgm"), r.visible_prob);
    write_pgm(dir / (stem + ".occluded.pgm"), r.occluded);
    write_pgm(dir / (stem + ".combined.pgm"), r.combined);
    write_anchor_grids(dir / (stem + ".anchors.json"), r.occluded_grids);
  });
  std::ofstream frames(dir / "frames.jsonl", std::ios::binary);
  for (std::size_t i = 0; i < seq.scans.size(); ++i) {
    frames << json{{"index", i}, {"t_us", seq.scans[i].timestamp}}.dump() << '\n';
  }
  if (!frames) throw Error("failed to write frames.jsonl");
  ctx.save_effective(dir);
  info("inferred " + std::to_string(seq.scans.size()) + " frames into " + dir.string());
}

std::vector<std::pair<std::size_t, Micros>> read_frame_list(const fs::path& path) {
  require(path);
  std::ifstream is(path, std::ios::binary);
  std::vector<std::pair<std::size_t, Micros>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.emplace_back(j.at("index").get<std::size_t>(), j.at("t_us").get<Micros>());
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return out;
}

void cmd_postprocess(Context& ctx, const std::string& mask_dir, const std::string& poses, const std::string& suffix) {
  ctx.resolve();
  const auto frames = read_frame_list(fs::path(mask_dir) / "frames.jsonl");
  const Trajectory traj = (require(poses), read_pose_file(poses));
  const fs::path dir = ctx.out_dir();
  PostprocessSession session(traj, ctx.cfg.postprocess);
  for (const auto& [index, t] : frames) {
    const fs::path in = fs::path(mask_dir) / (frame_name(index) + "." + suffix + ".pgm");
    require(in);
    const auto out = session.push(t, read_pgm(in, ctx.cfg.grid.resolution));
    write_pgm(dir / (frame_name(index) + ".filtered.pgm"), out.filtered);
    write_pgm(dir / (frame_name(index) + ".tracked.pgm"), out.tracked);
  }
  std::filesystem::copy_file(fs::path(mask_dir) / "frames.jsonl", dir / "frames.jsonl",
                             fs::copy_options::overwrite_existing);
  ctx.save_effective(dir);
  info("post-processed " + std::to_string(frames.size()) + " frames into " + dir.string());
}

void cmd_eval(Context& ctx, const std::string& pred_dir, const std::string& gt_dir, const std::string& pred_suffix,
              const std::string& gt_suffix, const std::string& tol, const std::string& regions_arg,
              const std::string& csv_path) {
  ctx.resolve();
  const auto tolerances = parse_int_list(tol);
  const auto frames = frames_in(pred_dir, pred_suffix + ".pgm");
  const double res = ctx.cfg.grid.resolution;
  std::vector<CurbMask> preds;
  std::vector<CurbMask> gts;
  for (std::size_t i : frames) {
    const fs::path gt = fs::path(gt_dir) / (frame_name(i) + "." + gt_suffix + ".pgm");
    require(gt);
    preds.push_back(threshold(read_pgm(fs::path(pred_dir) / (frame_name(i) + "." + pred_suffix + ".pgm"), res), 0.5f));
    gts.push_back(threshold(read_pgm(gt, res), 0.5f));
  }
  std::vector<RegionSize> regions = regions_arg.empty()
                                        ? std::vector<RegionSize>{{preds.front().width(), preds.front().height()}}
                                        : parse_regions(regions_arg);
  std::vector<MaskPair> pairs;
  for (std::size_t k = 0; k < preds.size(); ++k) pairs.push_back({&preds[k], &gts[k]});
  const EvalReport report = aggregate_report(pairs, regions, tolerances);
  print_report_table(std::cout, report);
  if (!csv_path.empty()) {
    const fs::path p(csv_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    write_report_csv(os, report);
    if (!os) throw Error("failed to write " + csv_path);
  } else if (!ctx.out.empty()) {
    std::ofstream os(ctx.out_dir() / "eval.csv", std::ios::binary);
    write_report_csv(os, report);
    if (!os) throw Error("failed to write eval.csv");
  }
}

void cmd_render(Context& ctx, const std::string& bev_dir, const std::string& mask_dir, const std::string& track_dir) {
  ctx.resolve();
  const auto frames = frames_in(mask_dir, "visible.pgm");
  const fs::path dir = ctx.out_dir();
  const double res = ctx.cfg.grid.resolution;
  parallel_for(frames.size(), ctx.threads, [&](std::size_t k) {
    const std::string stem = frame_name(frames[k]);
    const CurbMask visible = threshold(read_pgm(fs::path(mask_dir) / (stem + ".visible.pgm"), res), 0.5f);
    const fs::path occ_path = fs::path(mask_dir) / (stem + ".occluded.pgm");
    const CurbMask occluded = fs::exists(occ_path) ? threshold(read_pgm(occ_path, res), 0.5f) : CurbMask(visible.grid);
    CurbMask tracked(visible.grid);
    if (!track_dir.empty()) {
      const fs::path p = fs::path(track_dir) / (stem + ".tracked.pgm");
      require(p);
      tracked = threshold(read_pgm(p, res), 0.5f);
    }
    std::optional<BevImage> bev;
    if (!bev_dir.empty()) {
      const fs::path p = fs::path(bev_dir) / (stem + ".bev");
      require(p);
      bev = read_bev(p);
      if (!(bev->grid.width == visible.width() && bev->grid.height == visible.height())) {
        throw GridMismatch("BEV and mask sizes differ for frame " + stem);
      }
    }
    const int w = visible.width();
    const int h = visible.height();
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3, 0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        std::uint8_t* px = &rgb[(static_cast<std::size_t>(r) * w + c) * 3];
        std::array<std::uint8_t, 3> col{0, 0, 0};
        if (bev) {
          const auto g = static_cast<std::uint8_t>(std::lround(160.0f * std::clamp(bev->at(1, r, c), 0.0f, 1.0f)));
          col = {g, g, g};
        }
        if (tracked.at(r, c) > 0.5f) col = {0, 0, 255};
        if (visible.at(r, c) > 0.5f) col = {255, 255, 255};
        if (occluded.at(r, c) > 0.5f) col = {255, 255, 0};
        std::copy(col.begin(), col.end(), px);
      }
    }
    write_png(dir / (stem + ".png"), w, h, rgb);
  });
  info("rendered " + std::to_string(frames.size()) + " frames into " + dir.string());
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"curbctl: LIDAR curb detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_option("--config", ctx.config_path, "JSON config; missing keys keep their defaults");
  app.add_option("--seed", ctx.seed, "Overrides the config seed");
  app.add_option("--threads", ctx.threads, "Worker threads for per-frame stages")->check(CLI::PositiveNumber);
  bool dump_config = false;
  app.add_flag("--print-config", dump_config, "Print the effective config as JSON and exit");

  auto add_out = [&](CLI::App* sub, bool required = true) {
    auto* o = sub->add_option("--out", ctx.out, "Output directory");
    if (required) o->required();
  };

  std::optional<int> frames;
  std::optional<int> epochs;
  std::string seq_dir, mask_dir, suffix = "occluded", visible_model, occluded_model, poses, pred_dir, gt_dir;
  std::string pred_suffix = "tracked", gt_suffix = "curb", tol = "1,2,3,4", regions, csv, bev_dir, track_dir;
  std::string pp_suffix = "combined";

  auto* synth = app.add_subcommand("synth-gen", "Simulate a scene and write a sequence directory");
  synth->add_option("--frames", frames, "Number of scans")->check(CLI::PositiveNumber);
  add_out(synth);

  auto* bev = app.add_subcommand("build-bev", "Write one BEV image per scan of a sequence");
  bev->add_option("--seq", seq_dir, "Sequence directory")->required();
  add_out(bev);

  auto* label = app.add_subcommand("label", "Split simulated curbs into visible and occluded masks");
  label->add_option("--seq", seq_dir, "Sequence directory with scene.json")->required();
  add_out(label);

  auto* encode = app.add_subcommand("encode", "Encode masks into anchor grids");
  encode->add_option("--masks", mask_dir, "Directory of NNNN.<suffix>.pgm masks")->required();
  encode->add_option("--suffix", suffix, "Mask suffix")->capture_default_str();
  add_out(encode);

  auto* tv = app.add_subcommand("train-visible", "Train the visible-curb network on simulated frames");
  tv->add_option("--epochs", epochs, "Overrides train_visible.epochs");
  add_out(tv);

  auto* to = app.add_subcommand("train-occluded", "Train the occluded-curb network on simulated frames");
  to->add_option("--epochs", epochs, "Overrides train_occluded.epochs");
  to->add_option("--visible-model", visible_model, "Use this network's thresholded output as the visible input");
  add_out(to);

  auto* inf = app.add_subcommand("infer", "Run both networks on every scan of a sequence");
  inf->add_option("--seq", seq_dir, "Sequence directory")->required();
  inf->add_option("--visible-model", visible_model, "Visible checkpoint")->required();
  inf->add_option("--occluded-model", occluded_model, "Occluded checkpoint")->required();
  add_out(inf);

  auto* pp = app.add_subcommand("postprocess", "Temporal filtering and tracking of inferred masks");
  pp->add_option("--masks", mask_dir, "Directory written by infer")->required();
  pp->add_option("--poses", poses, "Pose file (JSON Lines)")->required();
  pp->add_option("--suffix", pp_suffix, "Mask suffix to filter")->capture_default_str();
  add_out(pp);

  auto* ev = app.add_subcommand("eval", "Tolerance precision, recall and F1");
  ev->add_option("--pred", pred_dir, "Prediction directory")->required();
  ev->add_option("--gt", gt_dir, "Ground-truth directory")->required();
  ev->add_option("--pred-suffix", pred_suffix, "Prediction mask suffix")->capture_default_str();
  ev->add_option("--gt-suffix", gt_suffix, "Ground-truth mask suffix")->capture_default_str();
  ev->add_option("--tol", tol, "Comma-separated tolerances in pixels")->capture_default_str();
  ev->add_option("--regions", regions, "Comma-separated WxH crops (default: full frame)");
  ev->add_option("--csv", csv, "CSV output path (default: <out>/eval.csv when --out is given)");
  add_out(ev, false);

  auto* render = app.add_subcommand("render", "PNG overlays of visible, occluded and tracked curbs");
  render->add_option("--masks", mask_dir, "Directory written by infer")->required();
  render->add_option("--bev", bev_dir, "Directory written by build-bev (background)");
  render->add_option("--tracked", track_dir, "Directory written by postprocess");
  add_out(render);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  try {
    if (dump_config) {
      ctx.resolve();
      std::cout << config_to_json(ctx.cfg).dump(2) << '\n';
      return kOk;
    }
    if (*synth) cmd_synth_gen(ctx, frames);
    if (*bev) cmd_build_bev(ctx, seq_dir);
    if (*label) cmd_label(ctx, seq_dir);
    if (*encode) cmd_encode(ctx, mask_dir, suffix);
    if (*tv) cmd_train_visible(ctx, epochs);
    if (*to) cmd_train_occluded(ctx, epochs, visible_model);
    if (*inf) cmd_infer(ctx, seq_dir, visible_model, occluded_model);
    if (*pp) cmd_postprocess(ctx, mask_dir, poses, pp_suffix);
    if (*ev) cmd_eval(ctx, pred_dir, gt_dir, pred_suffix, gt_suffix, tol, regions, csv);
    if (*render) cmd_render(ctx, bev_dir, mask_dir, track_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const MissingInput& e) {
    std::cerr << e.what() << '\n';
    return kMissingInput;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace curb::cli
