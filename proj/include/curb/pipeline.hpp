#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "curb/anchor_codec.hpp"
#include "curb/bev.hpp"
#include "curb/geometry.hpp"
#include "curb/nn/models.hpp"
#include "curb/nn/optim.hpp"
#include "curb/pointcloud.hpp"
#include "curb/synth.hpp"

namespace curb {

/// Trims every scan in the window ending at `reference_t`, maps them into
/// the sensor frame at `reference_t` and rasterizes the result.
BevImage build_bev(std::span<const LidarScan> scans, const Trajectory& traj, Micros reference_t, const GridSpec& grid,
                   const TrimConfig& trim = {}, std::size_t window = 5);

/// One training or evaluation frame: BEV input and labels on the same grid.
struct FrameSample {
  BevImage bev;
  CurbMask curb;
  CurbMask visible;
  CurbMask occluded;
};

struct DatasetConfig {
  int frames = 250;
  GridSpec grid = [] {
    GridSpec g;
    g.width = 160;
    g.height = 320;
    return g;
  }();
  std::size_t window = 5;
  double min_speed = 4.0;  // m/s
  double max_speed = 12.0;
  double min_station = -5.0;  // arc length of the newest scan, metres
  double max_station = 45.0;
  BeamConfig beams;
  TrimConfig trim;
  SceneConfig scene;
};

/// Frame i is drawn from its own scene and drive, both seeded by
/// derive_seed(seed, i), so any subset can be regenerated independently.
FrameSample make_frame(const DatasetConfig& cfg, std::uint64_t seed, std::size_t index);
std::vector<FrameSample> make_dataset(const DatasetConfig& cfg, std::uint64_t seed);

struct TrainConfig {
  int epochs = 20;
  double lr = 0.01;
  nn::OptimizerConfig optimizer;
  std::size_t batch = 4;
  int crop_width = 0;  // 0 keeps the full frame; must be a multiple of 8
  int crop_height = 0;
  bool augment = true;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  /// Stops after the epoch that crosses this wall-clock budget (0 = none).
  double time_budget_s = 0.0;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Pixel-wise BCE with the per-frame positive weight (#neg / #pos, capped).
std::vector<EpochLog> train_visible(nn::VisibleNet<float>& net, std::span<const FrameSample> data,
                                    const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Replaces every sample's visible mask by the thresholded output of `net`, so
/// the occluded network trains on the input it will see at inference time.
void use_predicted_visible(std::span<FrameSample> data, const nn::VisibleNet<float>& net, float threshold = 0.5f);

/// Total anchor loss over all scales. The visible channel of the input is the
/// sample's visible mask.
std::vector<EpochLog> train_occluded(nn::OccludedNet<float>& net, std::span<const FrameSample> data,
                                     const TrainConfig& cfg, const AnchorSpec& anchors = {},
                                     const EpochCallback& on_epoch = {});

struct Inference {
  CurbMask visible_prob;
  AnchorGridSet occluded_grids;
  CurbMask occluded;  // decoded lines, binary
  CurbMask combined;  // pixelwise max of visible_prob and occluded
};

struct InferConfig {
  float visible_threshold = 0.5f;
  float presence_threshold = 0.5f;
};

Inference infer_bev(const nn::VisibleNet<float>& visible, const nn::OccludedNet<float>& occluded, const BevImage& bev,
                    const InferConfig& cfg = {});

}  // namespace curb
