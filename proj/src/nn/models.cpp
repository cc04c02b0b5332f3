#include "curb/nn/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "curb/errors.hpp"
#include "curb/rng.hpp"

namespace curb::nn {
namespace {

constexpr char kCheckpointMagic[4] = {'C', 'R', 'B', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
Tensor<T> random_tensor(std::vector<int> shape, double stddev, std::uint64_t seed) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape), true);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
Conv<T> make_conv(ParameterList<T>& params, const std::string& name, int cin, int cout, int k, std::uint64_t& state,
                  double gain = 1.0) {
  Conv<T> c;
  c.pad = k / 2;
  c.weight = random_tensor<T>({cout, cin, k, k}, gain * std::sqrt(2.0 / (cin * k * k)), next_seed(state));
  c.bias = Tensor<T>::zeros({cout}, true);
  params.names.push_back(name + ".weight");
  params.tensors.push_back(c.weight);
  params.names.push_back(name + ".bias");
  params.tensors.push_back(c.bias);
  return c;
}

template <typename T>
void zero(Tensor<T>& t) {
  std::fill(t.data().begin(), t.data().end(), T(0));
}

nlohmann::json param_shapes(const auto& params) {
  nlohmann::json shapes = nlohmann::json::array();
  for (std::size_t i = 0; i < params.names.size(); ++i) {
    shapes.push_back({{"name", params.names[i]}, {"shape", params.tensors[i].shape()}});
  }
  return shapes;
}

int log2_exact(int v) {
  int n = 0;
  while ((1 << n) < v) ++n;
  if ((1 << n) != v) throw ConfigError("anchor cell sizes must be powers of two");
  return n;
}

}  // namespace

template <typename T>
std::size_t ParameterList<T>::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.numel();
  return n;
}

template <typename T>
void ParameterList<T>::zero_grad() {
  for (auto& t : tensors) {
    auto& g = t.grad();
    std::fill(g.begin(), g.end(), T(0));
  }
}

template <typename T>
Conv<T>& VisibleNet<T>::add_conv(const std::string& name, int cin, int cout, int k, std::uint64_t& state) {
  convs_.push_back(make_conv<T>(params_, name, cin, cout, k, state));
  return convs_.back();
}

template <typename T>
VisibleNet<T>::VisibleNet(Config cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.base_channels < 1) throw ConfigError("base_channels must be >= 1");
  const int b = cfg_.base_channels;
  std::uint64_t state = seed;
  convs_.reserve(15);
  add_conv("enc1a", 3, b, 3, state);
  add_conv("enc1b", b, b, 3, state);
  add_conv("enc2a", b, 2 * b, 3, state);
  add_conv("enc2b", 2 * b, 2 * b, 3, state);
  add_conv("enc3a", 2 * b, 4 * b, 3, state);
  add_conv("enc3b", 4 * b, 4 * b, 3, state);
  add_conv("bottleneck_a", 4 * b, 8 * b, 3, state);
  add_conv("bottleneck_b", 8 * b, 8 * b, 3, state);
  add_conv("up3", 8 * b, 4 * b, 3, state);
  add_conv("dec3", 8 * b, 4 * b, 3, state);
  add_conv("up2", 4 * b, 2 * b, 3, state);
  add_conv("dec2", 4 * b, 2 * b, 3, state);
  add_conv("up1", 2 * b, b, 3, state);
  add_conv("dec1", 2 * b, b, 3, state);
  add_conv("head", b, 1, 1, state);
}

template <typename T>
Tensor<T> VisibleNet<T>::forward(const Tensor<T>& x) const {
  if (x.shape().size() != 3 || x.dim(0) != 3) throw ShapeMismatch("VisibleNet expects (3,H,W), got " + shape_string(x.shape()));
  if (x.dim(1) % 8 != 0 || x.dim(2) % 8 != 0) throw ShapeMismatch("VisibleNet needs H and W divisible by 8");
  const auto& c = convs_;
  auto block = [&](const Tensor<T>& in, int i) { return relu(c[i + 1](relu(c[i](in)))); };
  const Tensor<T> e1 = block(x, 0);
  const Tensor<T> e2 = block(maxpool2(e1), 2);
  const Tensor<T> e3 = block(maxpool2(e2), 4);
  const Tensor<T> bn = block(maxpool2(e3), 6);
  const Tensor<T> d3 = relu(c[9](concat(relu(c[8](upsample2(bn))), e3)));
  const Tensor<T> d2 = relu(c[11](concat(relu(c[10](upsample2(d3))), e2)));
  const Tensor<T> d1 = relu(c[13](concat(relu(c[12](upsample2(d2))), e1)));
  return sigmoid(c[14](d1));
}

template <typename T>
nlohmann::json VisibleNet<T>::descriptor() const {
  return {{"type", "visible"}, {"base_channels", cfg_.base_channels}, {"parameters", param_shapes(params_)}};
}

template <typename T>
void VisibleNet<T>::zero_head() {
  zero(convs_.back().weight);
  zero(convs_.back().bias);
}

template <typename T>
OccludedNet<T>::OccludedNet(Config cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  if (cfg_.cell_sizes.empty()) throw ConfigError("occluded net needs at least one scale");
  if (cfg_.intra_kernel < 1 || cfg_.intra_kernel % 2 == 0) throw ConfigError("intra_kernel must be odd");
  for (std::size_t i = 1; i < cfg_.cell_sizes.size(); ++i) {
    if (cfg_.cell_sizes[i] <= cfg_.cell_sizes[i - 1]) throw ConfigError("cell sizes must increase");
    log2_exact(cfg_.cell_sizes[i] / cfg_.cell_sizes[i - 1]);
  }
  const int levels = log2_exact(cfg_.cell_sizes.front());
  const int f = cfg_.feature_channels;
  std::uint64_t state = seed;
  int cin = 4;
  trunk_.reserve(static_cast<std::size_t>(levels) + 1);
  for (int l = 0; l < levels; ++l) {
    const int cout = l + 1 == levels ? f : std::min(f, cfg_.base_channels << l);
    trunk_.push_back(make_conv<T>(params_, "trunk" + std::to_string(l), cin, cout, 3, state));
    cin = cout;
  }
  trunk_.push_back(make_conv<T>(params_, "trunk" + std::to_string(levels), cin, f, 3, state));
  if (cfg_.intra_layer) {
    const char* names[4] = {"intra_down", "intra_up", "intra_right", "intra_left"};
    const int k = cfg_.intra_kernel;
    for (const char* n : names) {
      intra_weights_.push_back(random_tensor<T>({f, f, k}, 0.3 * std::sqrt(1.0 / (f * k)), next_seed(state)));
      params_.names.push_back(std::string(n) + ".weight");
      params_.tensors.push_back(intra_weights_.back());
    }
  }
  for (int cell : cfg_.cell_sizes) {
    const std::string tag = "head" + std::to_string(cell);
    head_hidden_.push_back(make_conv<T>(params_, tag + ".hidden", f, f, 3, state));
    head_out_.push_back(make_conv<T>(params_, tag + ".out", f, 16, 1, state, 0.5));
  }
}

template <typename T>
std::vector<Tensor<T>> OccludedNet<T>::forward(const Tensor<T>& x) const {
  if (x.shape().size() != 3 || x.dim(0) != 4) throw ShapeMismatch("OccludedNet expects (4,H,W), got " + shape_string(x.shape()));
  Tensor<T> h = x;
  for (std::size_t l = 0; l + 1 < trunk_.size(); ++l) h = maxpool2(relu(trunk_[l](h)));
  h = relu(trunk_.back()(h));
  if (cfg_.intra_layer) {
    const SliceDirection dirs[4] = {SliceDirection::Down, SliceDirection::Up, SliceDirection::Right, SliceDirection::Left};
    for (int i = 0; i < 4; ++i) h = intra_pass(h, intra_weights_[static_cast<std::size_t>(i)], dirs[i]);
  }
  std::vector<Tensor<T>> heads;
  Tensor<T> f = h;
  for (std::size_t s = 0; s < cfg_.cell_sizes.size(); ++s) {
    if (s > 0) {
      for (int r = cfg_.cell_sizes[s] / cfg_.cell_sizes[s - 1]; r > 1; r /= 2) f = maxpool2(f);
    }
    heads.push_back(head_out_[s](relu(head_hidden_[s](f))));
  }
  return heads;
}

template <typename T>
nlohmann::json OccludedNet<T>::descriptor() const {
  return {{"type", "occluded"},
          {"base_channels", cfg_.base_channels},
          {"feature_channels", cfg_.feature_channels},
          {"cell_sizes", cfg_.cell_sizes},
          {"intra_layer", cfg_.intra_layer},
          {"intra_kernel", cfg_.intra_kernel},
          {"parameters", param_shapes(params_)}};
}

template <typename T>
void OccludedNet<T>::zero_head() {
  for (auto& c : head_out_) {
    zero(c.weight);
    zero(c.bias);
  }
}

template <typename T>
Tensor<T> bev_tensor(const BevImage& bev) {
  std::vector<T> v(bev.data.begin(), bev.data.end());
  return Tensor<T>::from({3, bev.grid.height, bev.grid.width}, std::move(v));
}

template <typename T>
Tensor<T> occluded_input(const BevImage& bev, const CurbMask& visible) {
  if (!(bev.grid.width == visible.grid.width && bev.grid.height == visible.grid.height)) {
    throw ShapeMismatch("BEV and visible mask sizes differ");
  }
  std::vector<T> v(bev.data.begin(), bev.data.end());
  v.insert(v.end(), visible.values.begin(), visible.values.end());
  return Tensor<T>::from({4, bev.grid.height, bev.grid.width}, std::move(v));
}

template <typename T>
CurbMask forward_visible(const VisibleNet<T>& net, const BevImage& bev) {
  NoGradGuard guard;
  const Tensor<T> out = net.forward(bev_tensor<T>(bev));
  CurbMask mask(bev.grid);
  for (std::size_t i = 0; i < mask.values.size(); ++i) mask.values[i] = static_cast<float>(out.data()[i]);
  return mask;
}

template <typename T>
AnchorGridSet heads_to_grids(const std::vector<Tensor<T>>& heads, const std::vector<int>& cells, const GridSpec& image) {
  if (heads.size() != cells.size()) throw ShapeMismatch("head count does not match scale count");
  AnchorGridSet out;
  out.image = image;
  for (std::size_t s = 0; s < heads.size(); ++s) {
    const auto& h = heads[s];
    AnchorGrid g(cells[s], h.dim(1), h.dim(2));
    const std::size_t plane = static_cast<std::size_t>(g.rows) * g.cols;
    for (std::size_t j = 0; j < plane; ++j) {
      for (int k = 0; k < kAnchorCount; ++k) {
        const double logit = h.data()[k * plane + j];
        g.cells[j].presence[k] = static_cast<float>(1.0 / (1.0 + std::exp(-logit)));
        g.cells[j].omega[k] = static_cast<float>(h.data()[(4 + k) * plane + j]);
        g.cells[j].beta[k] = static_cast<float>(h.data()[(8 + k) * plane + j] * cells[s]);
      }
    }
    out.scales.push_back(std::move(g));
  }
  return out;
}

template <typename T>
AnchorGridSet forward_occluded(const OccludedNet<T>& net, const BevImage& bev, const CurbMask& visible) {
  NoGradGuard guard;
  const auto heads = net.forward(occluded_input<T>(bev, visible));
  return heads_to_grids(heads, net.config().cell_sizes, bev.grid);
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& descriptor,
                     const ParameterList<float>& params) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  const std::string desc = descriptor.dump();
  out.write(kCheckpointMagic, 4);
  const std::uint32_t version = kCheckpointVersion;
  const auto len = static_cast<std::uint32_t>(desc.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  for (const auto& t : params.tensors) {
    out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
}

namespace {

nlohmann::json read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic in " + path.string());
  std::uint32_t version = 0;
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || version != kCheckpointVersion) throw FormatError("unsupported checkpoint version in " + path.string());
  std::string desc(len, '\0');
  in.read(desc.data(), len);
  if (!in) throw FormatError("truncated checkpoint " + path.string());
  try {
    return nlohmann::json::parse(desc);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint descriptor: ") + e.what());
  }
}

}  // namespace

nlohmann::json read_checkpoint_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return read_header(in, path);
}

void load_checkpoint(const std::filesystem::path& path, ParameterList<float>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const auto desc = read_header(in, path);
  const auto& shapes = desc.at("parameters");
  if (shapes.size() != params.tensors.size()) throw FormatError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (shapes[i].at("shape").get<std::vector<int>>() != params.tensors[i].shape()) {
      throw FormatError("checkpoint shape mismatch for " + params.names[i]);
    }
    auto& d = params.tensors[i].data();
    in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(float)));
    if (!in) throw FormatError("truncated checkpoint " + path.string());
  }
}

VisibleNet<float> load_visible_net(const std::filesystem::path& path) {
  const auto desc = read_checkpoint_descriptor(path);
  if (desc.value("type", "") != "visible") throw FormatError(path.string() + " is not a visible-curb checkpoint");
  VisibleNet<float> net({desc.at("base_channels").get<int>()});
  load_checkpoint(path, net.parameters());
  return net;
}

OccludedNet<float> load_occluded_net(const std::filesystem::path& path) {
  const auto desc = read_checkpoint_descriptor(path);
  if (desc.value("type", "") != "occluded") throw FormatError(path.string() + " is not an occluded-curb checkpoint");
  OccludedNet<float>::Config cfg;
  cfg.base_channels = desc.at("base_channels").get<int>();
  cfg.feature_channels = desc.at("feature_channels").get<int>();
  cfg.cell_sizes = desc.at("cell_sizes").get<std::vector<int>>();
  cfg.intra_layer = desc.at("intra_layer").get<bool>();
  cfg.intra_kernel = desc.at("intra_kernel").get<int>();
  OccludedNet<float> net(cfg);
  load_checkpoint(path, net.parameters());
  return net;
}

#define CURB_MODELS_INSTANTIATE(T)                                                                    \
  template struct ParameterList<T>;                                                                   \
  template class VisibleNet<T>;                                                                       \
  template class OccludedNet<T>;                                                                      \
  template Tensor<T> bev_tensor<T>(const BevImage&);                                                  \
  template Tensor<T> occluded_input<T>(const BevImage&, const CurbMask&);                             \
  template CurbMask forward_visible(const VisibleNet<T>&, const BevImage&);                           \
  template AnchorGridSet forward_occluded(const OccludedNet<T>&, const BevImage&, const CurbMask&);   \
  template AnchorGridSet heads_to_grids(const std::vector<Tensor<T>>&, const std::vector<int>&, const GridSpec&);

CURB_MODELS_INSTANTIATE(float)
CURB_MODELS_INSTANTIATE(double)

}  // namespace curb::nn
