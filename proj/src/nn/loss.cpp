#include "curb/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "curb/errors.hpp"

namespace curb::nn {
namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double bce(double p, double y) {
  const double q = clamp_prob(p);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double smooth_l1_grad(double x) {
  if (std::abs(x) < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

void require_matching(const AnchorGridSet& a, const AnchorGridSet& b) {
  if (a.scales.size() != b.scales.size()) throw ShapeMismatch("anchor grid sets have different scale counts");
  for (std::size_t i = 0; i < a.scales.size(); ++i) {
    const auto& x = a.scales[i];
    const auto& y = b.scales[i];
    if (x.rows != y.rows || x.cols != y.cols || x.cell_px != y.cell_px) {
      throw ShapeMismatch("anchor grid shapes differ at scale " + std::to_string(i));
    }
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double loss_discrete(const AnchorGridSet& pred, const AnchorGridSet& gt) {
  require_matching(pred, gt);
  double total = 0.0;
  for (std::size_t s = 0; s < pred.scales.size(); ++s) {
    const auto& p = pred.scales[s];
    const auto& g = gt.scales[s];
    for (std::size_t j = 0; j < p.cells.size(); ++j) {
      for (int k = 0; k < kAnchorCount; ++k) total += bce(p.cells[j].presence[k], g.cells[j].presence[k]);
    }
  }
  return total;
}

double loss_continuous(const AnchorGridSet& pred, const AnchorGridSet& gt) {
  require_matching(pred, gt);
  double total = 0.0;
  for (std::size_t s = 0; s < pred.scales.size(); ++s) {
    const auto& p = pred.scales[s];
    const auto& g = gt.scales[s];
    const double cell = g.cell_px;
    for (std::size_t j = 0; j < p.cells.size(); ++j) {
      for (int k = 0; k < kAnchorCount; ++k) {
        const double y = g.cells[j].mask[k];
        if (y == 0.0) continue;
        total += y * (smooth_l1(static_cast<double>(p.cells[j].omega[k]) - g.cells[j].omega[k]) +
                      smooth_l1((static_cast<double>(p.cells[j].beta[k]) - g.cells[j].beta[k]) / cell));
      }
    }
  }
  return total;
}

double loss_total(const AnchorGridSet& pred, const AnchorGridSet& gt, const LossConfig& cfg) {
  return loss_discrete(pred, gt) + cfg.alpha * loss_continuous(pred, gt);
}

double pixel_bce(const CurbMask& pred, const CurbMask& gt, double pos_weight) {
  if (!(pred.grid.width == gt.grid.width && pred.grid.height == gt.grid.height)) {
    throw ShapeMismatch("pixel_bce: mask sizes differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double y = gt.values[i];
    const double q = clamp_prob(pred.values[i]);
    total -= pos_weight * y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  return total / static_cast<double>(pred.values.size());
}

double default_pos_weight(const CurbMask& gt) {
  const std::size_t pos = count_on(gt);
  if (pos == 0) return 1.0;
  const double ratio = static_cast<double>(gt.values.size() - pos) / static_cast<double>(pos);
  return std::min(50.0, ratio);
}

template <typename T>
Tensor<T> pixel_bce_loss(const Tensor<T>& prob, std::span<const float> gt, T pos_weight) {
  if (prob.numel() != gt.size()) throw ShapeMismatch("pixel_bce_loss: prediction and label sizes differ");
  const std::size_t n = gt.size();
  auto node = std::make_shared<Node<T>>();
  node->shape = {1};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = gt[i];
    const double q = clamp_prob(static_cast<double>(prob.data()[i]));
    total -= static_cast<double>(pos_weight) * y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  node->value = {static_cast<T>(total / static_cast<double>(n))};
  if (!NoGradGuard::active() && prob.requires_grad()) {
    node->requires_grad = true;
    node->parents = {prob.node()};
    std::vector<float> labels(gt.begin(), gt.end());
    node->backward = [labels = std::move(labels), pos_weight, n](Node<T>& self) {
      auto& pn = *self.parents[0];
      pn.ensure_grad();
      const double scale = static_cast<double>(self.grad[0]) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = pn.value[i];
        if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
        const double y = labels[i];
        const double d = -static_cast<double>(pos_weight) * y / p + (1.0 - y) / (1.0 - p);
        pn.grad[i] += static_cast<T>(scale * d);
      }
    };
  }
  return Tensor<T>(node);
}

template <typename T>
Tensor<T> anchor_scale_loss(const Tensor<T>& head, const AnchorGrid& gt, T alpha) {
  if (head.shape().size() != 3 || head.dim(0) != 16 || head.dim(1) != gt.rows || head.dim(2) != gt.cols) {
    throw ShapeMismatch("anchor_scale_loss: head " + shape_string(head.shape()) + " vs grid " +
                        std::to_string(gt.rows) + "x" + std::to_string(gt.cols));
  }
  const std::size_t plane = static_cast<std::size_t>(gt.rows) * gt.cols;
  const double cell = gt.cell_px;
  const auto& v = head.data();
  double total = 0.0;
  for (std::size_t j = 0; j < plane; ++j) {
    const AnchorCell& g = gt.cells[j];
    for (int k = 0; k < kAnchorCount; ++k) {
      const double logit = v[k * plane + j];
      const double p = 1.0 / (1.0 + std::exp(-logit));
      total += bce(p, g.presence[k]);
      const double y = g.mask[k];
      if (y != 0.0) {
        total += static_cast<double>(alpha) * y *
                 (smooth_l1(static_cast<double>(v[(4 + k) * plane + j]) - g.omega[k]) +
                  smooth_l1(static_cast<double>(v[(8 + k) * plane + j]) - g.beta[k] / cell));
      }
    }
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = {1};
  node->value = {static_cast<T>(total)};
  if (!NoGradGuard::active() && head.requires_grad()) {
    node->requires_grad = true;
    node->parents = {head.node()};
    const AnchorGrid* gp = &gt;
    // Targets are copied so the closure does not outlive the caller's grid.
    node->backward = [grid = *gp, alpha, plane, cell](Node<T>& self) {
      auto& hn = *self.parents[0];
      hn.ensure_grad();
      const double up = self.grad[0];
      for (std::size_t j = 0; j < plane; ++j) {
        const AnchorCell& g = grid.cells[j];
        for (int k = 0; k < kAnchorCount; ++k) {
          const std::size_t li = k * plane + j;
          const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(hn.value[li])));
          if (p >= kProbClamp && p <= 1.0 - kProbClamp) {
            const double y = g.presence[k];
            const double dp = -y / p + (1.0 - y) / (1.0 - p);
            hn.grad[li] += static_cast<T>(up * dp * p * (1.0 - p));
          }
          const double m = g.mask[k];
          if (m == 0.0) continue;
          const std::size_t oi = (4 + k) * plane + j;
          const std::size_t bi = (8 + k) * plane + j;
          hn.grad[oi] += static_cast<T>(up * static_cast<double>(alpha) * m *
                                        smooth_l1_grad(static_cast<double>(hn.value[oi]) - g.omega[k]));
          hn.grad[bi] += static_cast<T>(up * static_cast<double>(alpha) * m *
                                        smooth_l1_grad(static_cast<double>(hn.value[bi]) - g.beta[k] / cell));
        }
      }
    };
  }
  return Tensor<T>(node);
}

template Tensor<float> pixel_bce_loss(const Tensor<float>&, std::span<const float>, float);
template Tensor<double> pixel_bce_loss(const Tensor<double>&, std::span<const float>, double);
template Tensor<float> anchor_scale_loss(const Tensor<float>&, const AnchorGrid&, float);
template Tensor<double> anchor_scale_loss(const Tensor<double>&, const AnchorGrid&, double);

}  // namespace curb::nn
