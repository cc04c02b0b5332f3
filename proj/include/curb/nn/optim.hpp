#pragma once

#include <functional>
#include <vector>

#include "curb/nn/models.hpp"

namespace curb::nn {

struct OptimizerConfig {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Sgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// SGD with momentum (default) or Adam. State is kept per parameter tensor in
/// declaration order.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg = {}) : cfg_(cfg) {}

  void step(ParameterList<T>& params, double lr);
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::vector<Buffer<T>> first_;
  std::vector<Buffer<T>> second_;
  long steps_ = 0;
};

/// One forward/backward/update over a mini-batch. `sample_loss(i)` builds the
/// loss graph of sample i; gradients are averaged over the batch. Throws
/// NonFiniteLoss before touching the parameters if any loss is NaN/inf.
template <typename T>
double train_step(ParameterList<T>& params, const std::function<Tensor<T>(std::size_t)>& sample_loss,
                  std::size_t batch_size, Optimizer<T>& opt, double lr);

}  // namespace curb::nn
