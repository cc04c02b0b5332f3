#pragma once

#include <functional>
#include <memory>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace curb::nn {

/// 64-byte aligned allocation. Vectorized reductions peel unaligned heads, so
/// without a fixed alignment the summation order (and the low bits of every
/// result) would depend on where the allocator placed a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

template <typename T>
struct Node {
  std::vector<int> shape;
  Buffer<T> value;
  Buffer<T> grad;  // allocated on demand
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;

  std::size_t numel() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

/// Shared handle to a node of the autograd graph. Copies alias the same data.
/// Shapes used by the networks are (channels, height, width) for a single
/// sample; scalars have shape {1}.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<T> values, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->value.size(); }
  Buffer<T>& data() { return node_->value; }
  const Buffer<T>& data() const { return node_->value; }
  Buffer<T>& grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  bool requires_grad() const { return node_->requires_grad; }
  T item() const { return node_->value.at(0); }
  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }

  /// Reverse-mode sweep from this scalar.
  void backward();

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Disables graph construction while alive (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
  static bool active();

 private:
  bool previous_;
};

/// 2-D convolution, stride 1, zero padding `pad`. x: (Cin,H,W),
/// weight: (Cout,Cin,k,k), bias: (Cout).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, int pad);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

/// 2x2 max pooling, stride 2, ceil mode (partial windows at odd borders).
template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x);

/// 2x nearest-neighbour upsampling.
template <typename T>
Tensor<T> upsample2(const Tensor<T>& x);

/// Channel concatenation of two (C,H,W) tensors with equal H and W.
template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Channel slice [begin, end) of a (C,H,W) tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int begin, int end);

enum class SliceDirection { Down, Up, Right, Left };

/// Slice-by-slice message passing: along `dir`, each slice receives
/// relu(conv1d(previous output slice)) added to its input. weight: (C,C,k).
template <typename T>
Tensor<T> intra_pass(const Tensor<T>& x, const Tensor<T>& weight, SliceDirection dir);

/// Weighted sum of all elements to a scalar: sum(x * w).
template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& x, std::span<const T> w);

/// Sum of scalars.
template <typename T>
Tensor<T> sum_scalars(const std::vector<Tensor<T>>& xs);

std::string shape_string(const std::vector<int>& shape);

}  // namespace curb::nn
