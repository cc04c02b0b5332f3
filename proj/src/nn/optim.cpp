#include "curb/nn/optim.hpp"

#include <cmath>

#include "curb/errors.hpp"

namespace curb::nn {

template <typename T>
void Optimizer<T>::step(ParameterList<T>& params, double lr) {
  if (first_.size() != params.tensors.size()) {
    first_.clear();
    second_.clear();
    for (const auto& t : params.tensors) {
      first_.emplace_back(t.numel(), T(0));
      if (cfg_.kind == OptimizerConfig::Kind::Adam) second_.emplace_back(t.numel(), T(0));
    }
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t p = 0; p < params.tensors.size(); ++p) {
    auto& w = params.tensors[p].data();
    const auto& g = params.tensors[p].grad();
    auto& m = first_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]) + cfg_.weight_decay * static_cast<double>(w[i]);
      if (cfg_.kind == OptimizerConfig::Kind::Sgd) {
        m[i] = static_cast<T>(cfg_.momentum * m[i] + gi);
        w[i] = static_cast<T>(w[i] - lr * m[i]);
      } else {
        auto& v = second_[p];
        m[i] = static_cast<T>(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi);
        v[i] = static_cast<T>(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi);
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        w[i] = static_cast<T>(w[i] - lr * mh / (std::sqrt(vh) + cfg_.eps));
      }
    }
  }
}

template <typename T>
double train_step(ParameterList<T>& params, const std::function<Tensor<T>(std::size_t)>& sample_loss,
                  std::size_t batch_size, Optimizer<T>& opt, double lr) {
  if (batch_size == 0) return 0.0;
  params.zero_grad();
  double total = 0.0;
  for (std::size_t i = 0; i < batch_size; ++i) {
    Tensor<T> loss = sample_loss(i);
    const double v = static_cast<double>(loss.item());
    if (!std::isfinite(v)) throw NonFiniteLoss("non-finite loss in training step");
    total += v;
    loss.backward();
  }
  const T inv = static_cast<T>(1.0 / static_cast<double>(batch_size));
  for (auto& t : params.tensors) {
    for (auto& g : t.grad()) {
      g *= inv;
      if (!std::isfinite(static_cast<double>(g))) throw NonFiniteLoss("non-finite gradient in training step");
    }
  }
  opt.step(params, lr);
  return total / static_cast<double>(batch_size);
}

template class Optimizer<float>;
template class Optimizer<double>;
template double train_step(ParameterList<float>&, const std::function<Tensor<float>(std::size_t)>&, std::size_t,
                           Optimizer<float>&, double);
template double train_step(ParameterList<double>&, const std::function<Tensor<double>(std::size_t)>&, std::size_t,
                           Optimizer<double>&, double);

}  // namespace curb::nn
