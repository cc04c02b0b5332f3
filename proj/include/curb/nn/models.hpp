#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "curb/anchor_codec.hpp"
#include "curb/bev.hpp"
#include "curb/nn/tensor.hpp"

namespace curb::nn {

template <typename T>
struct Conv {
  Tensor<T> weight;
  Tensor<T> bias;
  int pad = 0;

  Tensor<T> operator()(const Tensor<T>& x) const { return conv2d(x, weight, bias, pad); }
};

/// Named parameter list in declaration order.
template <typename T>
struct ParameterList {
  std::vector<std::string> names;
  std::vector<Tensor<T>> tensors;

  std::size_t count() const;
  void zero_grad();
};

/// Encoder-decoder with skip connections for visible curbs.
/// 3 down blocks (two 3x3 conv + ReLU, 2x2 max pool), a bottleneck, 3 up
/// blocks (nearest upsample, conv, skip concat, conv) and a 1x1 sigmoid head.
template <typename T>
class VisibleNet {
 public:
  struct Config {
    int base_channels = 8;
  };

  explicit VisibleNet(Config cfg = {}, std::uint64_t seed = 0);

  /// x: (3,H,W) with H and W divisible by 8. Returns probabilities (1,H,W).
  Tensor<T> forward(const Tensor<T>& x) const;

  ParameterList<T>& parameters() { return params_; }
  const ParameterList<T>& parameters() const { return params_; }
  const Config& config() const { return cfg_; }
  nlohmann::json descriptor() const;
  /// Zeroes the 1x1 head so every output is exactly 0.5.
  void zero_head();

 private:
  Conv<T>& add_conv(const std::string& name, int cin, int cout, int k, std::uint64_t& state);

  Config cfg_;
  std::vector<Conv<T>> convs_;
  ParameterList<T> params_;
};

/// Occluded-curb model: conv trunk over BEV + visible mask, a slice-by-slice
/// message passing block (down, up, right, left) and one 16-channel head per
/// anchor scale.
template <typename T>
class OccludedNet {
 public:
  struct Config {
    int base_channels = 8;
    int feature_channels = 32;
    std::vector<int> cell_sizes = {8, 16, 32};
    bool intra_layer = true;
    int intra_kernel = 5;
  };

  explicit OccludedNet(Config cfg = {}, std::uint64_t seed = 0);

  /// x: (4,H,W). One (16, ceil(H/cell), ceil(W/cell)) head per scale.
  std::vector<Tensor<T>> forward(const Tensor<T>& x) const;

  ParameterList<T>& parameters() { return params_; }
  const ParameterList<T>& parameters() const { return params_; }
  const Config& config() const { return cfg_; }
  nlohmann::json descriptor() const;
  /// Zeroes the final head layers: presence 0.5, omega = beta = 0.
  void zero_head();

 private:
  Config cfg_;
  std::vector<Conv<T>> trunk_;
  std::vector<Tensor<T>> intra_weights_;
  std::vector<Conv<T>> head_hidden_;
  std::vector<Conv<T>> head_out_;
  ParameterList<T> params_;
};

/// (3,H,W) tensor from a BEV image.
template <typename T>
Tensor<T> bev_tensor(const BevImage& bev);
/// (4,H,W): BEV channels plus a visible-curb mask.
template <typename T>
Tensor<T> occluded_input(const BevImage& bev, const CurbMask& visible);

template <typename T>
CurbMask forward_visible(const VisibleNet<T>& net, const BevImage& bev);

/// Presence through the logistic function; omega in radians; beta in pixels.
template <typename T>
AnchorGridSet forward_occluded(const OccludedNet<T>& net, const BevImage& bev, const CurbMask& visible);

/// Converts raw heads to an AnchorGridSet over `image`.
template <typename T>
AnchorGridSet heads_to_grids(const std::vector<Tensor<T>>& heads, const std::vector<int>& cells, const GridSpec& image);

/// Checkpoint: "CRBN", u32 version, u32 descriptor length, descriptor JSON,
/// then every parameter as little-endian f32 in declaration order.
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& descriptor,
                     const ParameterList<float>& params);
nlohmann::json read_checkpoint_descriptor(const std::filesystem::path& path);
void load_checkpoint(const std::filesystem::path& path, ParameterList<float>& params);

VisibleNet<float> load_visible_net(const std::filesystem::path& path);
OccludedNet<float> load_occluded_net(const std::filesystem::path& path);

}  // namespace curb::nn
