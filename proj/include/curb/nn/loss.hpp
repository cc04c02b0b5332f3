#pragma once

#include <span>

#include "curb/anchor_codec.hpp"
#include "curb/bev.hpp"
#include "curb/nn/tensor.hpp"

namespace curb::nn {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] in every
/// cross-entropy term.
inline constexpr double kProbClamp = 1e-7;

struct LossConfig {
  double alpha = 1.0;  // weight of the continuous term
  void validate() const;
};

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
double smooth_l1(double x);

/// Binary cross-entropy over every scale, cell and category.
double loss_discrete(const AnchorGridSet& pred, const AnchorGridSet& gt);
/// Masked smooth-L1 on omega (radians) and beta / cell size.
double loss_continuous(const AnchorGridSet& pred, const AnchorGridSet& gt);
double loss_total(const AnchorGridSet& pred, const AnchorGridSet& gt, const LossConfig& cfg = {});

/// Mean weighted binary cross-entropy; positive pixels weigh `pos_weight`.
double pixel_bce(const CurbMask& pred, const CurbMask& gt, double pos_weight = 1.0);
/// #negative / #positive, capped at 50; 1 when there are no positives.
double default_pos_weight(const CurbMask& gt);

// Differentiable forms used for training.

/// Same value as pixel_bce for a (1,H,W) probability tensor.
template <typename T>
Tensor<T> pixel_bce_loss(const Tensor<T>& prob, std::span<const float> gt, T pos_weight);

/// L_d + alpha * L_c of one scale. `head` is (16, rows, cols): presence
/// logits, omega, beta / cell_px, reserved.
template <typename T>
Tensor<T> anchor_scale_loss(const Tensor<T>& head, const AnchorGrid& gt, T alpha);

}  // namespace curb::nn
