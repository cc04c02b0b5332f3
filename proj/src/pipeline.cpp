#include "curb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "curb/errors.hpp"
#include "curb/nn/loss.hpp"
#include "curb/rng.hpp"

namespace curb {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

GridSpec sub_grid(const GridSpec& g, int w, int h) {
  GridSpec out = g;
  out.width = w;
  out.height = h;
  return out;
}

CurbMask crop_mask(const CurbMask& m, int row0, int col0, int w, int h) {
  CurbMask out(sub_grid(m.grid, w, h));
  for (int r = 0; r < h; ++r) {
    std::copy_n(&m.values[static_cast<std::size_t>(row0 + r) * m.grid.width + col0], w,
                &out.values[static_cast<std::size_t>(r) * w]);
  }
  return out;
}

BevImage crop_bev(const BevImage& b, int row0, int col0, int w, int h) {
  BevImage out(sub_grid(b.grid, w, h));
  out.range_scale = b.range_scale;
  out.height_floor = b.height_floor;
  out.height_scale = b.height_scale;
  const std::size_t n_in = b.grid.pixels();
  const std::size_t n_out = out.grid.pixels();
  for (int ch = 0; ch < BevImage::kChannels; ++ch) {
    for (int r = 0; r < h; ++r) {
      std::copy_n(&b.data[ch * n_in + static_cast<std::size_t>(row0 + r) * b.grid.width + col0], w,
                  &out.data[ch * n_out + static_cast<std::size_t>(r) * w]);
    }
  }
  return out;
}

// Augmented and cropped copy of one sample; everything derives from `seed`.
FrameSample prepare(const FrameSample& s, const TrainConfig& cfg, std::uint64_t seed) {
  FrameSample f = s;
  if (cfg.augment) augment(f.bev, {&f.curb, &f.visible, &f.occluded}, seed);
  const int w = cfg.crop_width > 0 ? cfg.crop_width : f.bev.grid.width;
  const int h = cfg.crop_height > 0 ? cfg.crop_height : f.bev.grid.height;
  if (w == f.bev.grid.width && h == f.bev.grid.height) return f;
  std::mt19937_64 rng(derive_seed(seed, 1));
  const int row0 = std::uniform_int_distribution<int>(0, f.bev.grid.height - h)(rng);
  const int col0 = std::uniform_int_distribution<int>(0, f.bev.grid.width - w)(rng);
  return {crop_bev(f.bev, row0, col0, w, h), crop_mask(f.curb, row0, col0, w, h),
          crop_mask(f.visible, row0, col0, w, h), crop_mask(f.occluded, row0, col0, w, h)};
}

template <typename Loss>
std::vector<EpochLog> run_training(nn::ParameterList<float>& params, std::span<const FrameSample> data,
                                   const TrainConfig& cfg, const EpochCallback& on_epoch, Loss&& sample_loss) {
  cfg.validate();
  if (data.empty()) throw ConfigError("training set is empty");
  nn::Optimizer<float> opt(cfg.optimizer);
  std::vector<EpochLog> logs;
  const auto t0 = Clock::now();
  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t n = std::min(cfg.batch, order.size() - start);
      const auto loss = nn::train_step<float>(
          params,
          [&](std::size_t i) {
            const std::size_t idx = order[start + i];
            const std::uint64_t s = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch) + 1), idx);
            return sample_loss(prepare(data[idx], cfg, s));
          },
          n, opt, cfg.lr);
      total += loss;
      ++batches;
    }
    logs.push_back({epoch, total / static_cast<double>(batches), seconds_since(t0)});
    if (on_epoch) on_epoch(logs.back());
    if (cfg.time_budget_s > 0.0 && logs.back().seconds >= cfg.time_budget_s) break;
  }
  return logs;
}

}  // namespace

BevImage build_bev(std::span<const LidarScan> scans, const Trajectory& traj, Micros reference_t, const GridSpec& grid,
                   const TrimConfig& trim, std::size_t window) {
  const auto idx = select_window(scans, reference_t, window);
  if (idx.empty()) throw OutOfRange("no scan at or before the reference time");
  std::vector<LidarScan> trimmed;
  trimmed.reserve(idx.size());
  for (std::size_t i : idx) trimmed.push_back(trim_scan(scans[i], trim));
  return rasterize_cloud(integrate_scans(trimmed, traj, reference_t), grid, trim.max_below);
}

FrameSample make_frame(const DatasetConfig& cfg, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(derive_seed(seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const SceneSpec scene = generate_scene(rng(), cfg.scene);
  SequenceConfig sc;
  sc.n_frames = static_cast<int>(cfg.window);
  sc.speed = cfg.min_speed + (cfg.max_speed - cfg.min_speed) * unit(rng);
  sc.s_start = cfg.min_station + (cfg.max_station - cfg.min_station) * unit(rng);
  sc.grid = cfg.grid;
  sc.beams = cfg.beams;
  const Sequence seq = generate_sequence(scene, sc, rng());
  FrameSample f;
  f.bev = build_bev(seq.scans, seq.trajectory, seq.scans.back().timestamp, cfg.grid, cfg.trim, cfg.window);
  f.curb = seq.labels.back().curb;
  f.visible = seq.labels.back().visible;
  f.occluded = seq.labels.back().occluded;
  return f;
}

std::vector<FrameSample> make_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  std::vector<FrameSample> out;
  out.reserve(static_cast<std::size_t>(cfg.frames));
  for (int i = 0; i < cfg.frames; ++i) out.push_back(make_frame(cfg, seed, static_cast<std::size_t>(i)));
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (crop_width < 0 || crop_height < 0 || crop_width % 8 != 0 || crop_height % 8 != 0) {
    throw ConfigError("crop sizes must be non-negative multiples of 8");
  }
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
}

std::vector<EpochLog> train_visible(nn::VisibleNet<float>& net, std::span<const FrameSample> data,
                                    const TrainConfig& cfg, const EpochCallback& on_epoch) {
  return run_training(net.parameters(), data, cfg, on_epoch, [&](const FrameSample& f) {
    const auto pos_weight = static_cast<float>(nn::default_pos_weight(f.visible));
    return nn::pixel_bce_loss(net.forward(nn::bev_tensor<float>(f.bev)), std::span<const float>(f.visible.values),
                              pos_weight);
  });
}

void use_predicted_visible(std::span<FrameSample> data, const nn::VisibleNet<float>& net, float t) {
  nn::NoGradGuard no_grad;
  for (auto& f : data) f.visible = threshold(nn::forward_visible(net, f.bev), t);
}

std::vector<EpochLog> train_occluded(nn::OccludedNet<float>& net, std::span<const FrameSample> data,
                                     const TrainConfig& cfg, const AnchorSpec& anchors,
                                     const EpochCallback& on_epoch) {
  if (anchors.cell_sizes != net.config().cell_sizes) throw ConfigError("anchor scales differ from the network heads");
  const auto alpha = static_cast<float>(cfg.alpha);
  return run_training(net.parameters(), data, cfg, on_epoch, [&](const FrameSample& f) {
    const AnchorGridSet gt = encode_mask(f.occluded, anchors);
    const auto heads = net.forward(nn::occluded_input<float>(f.bev, f.visible));
    std::vector<nn::Tensor<float>> parts;
    for (std::size_t s = 0; s < heads.size(); ++s) parts.push_back(nn::anchor_scale_loss(heads[s], gt.scales[s], alpha));
    return nn::sum_scalars(parts);
  });
}

Inference infer_bev(const nn::VisibleNet<float>& visible, const nn::OccludedNet<float>& occluded, const BevImage& bev,
                    const InferConfig& cfg) {
  Inference out;
  out.visible_prob = nn::forward_visible(visible, bev);
  out.occluded_grids = nn::forward_occluded(occluded, bev, threshold(out.visible_prob, cfg.visible_threshold));
  out.occluded = decode_grids(out.occluded_grids, cfg.presence_threshold);
  out.combined = mask_max(out.visible_prob, out.occluded);
  return out;
}

}  // namespace curb
