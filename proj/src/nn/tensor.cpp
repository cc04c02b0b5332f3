#include "curb/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <Eigen/Core>

#include "curb/errors.hpp"

namespace curb::nn {
namespace {

thread_local bool g_no_grad = false;

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t product(const std::vector<int>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

template <typename T>
Tensor<T> make_result(std::vector<int> shape, std::initializer_list<const Tensor<T>*> parents) {
  auto node = std::make_shared<Node<T>>();
  node->value.assign(product(shape), T(0));
  node->shape = std::move(shape);
  if (!g_no_grad) {
    for (const Tensor<T>* p : parents) {
      if (p->defined() && p->requires_grad()) node->requires_grad = true;
    }
    if (node->requires_grad) {
      for (const Tensor<T>* p : parents) node->parents.push_back(p->node());
    }
  }
  return Tensor<T>(node);
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ShapeMismatch(what);
}

template <typename T>
void require_chw(const Tensor<T>& x, const char* op) {
  require(x.defined() && x.shape().size() == 3, std::string(op) + ": expected (C,H,W), got " + shape_string(x.shape()));
}

// col: (Cin*k*k, Ho*Wo)
template <typename T>
void im2col(const T* x, int cin, int h, int w, int k, int pad, int ho, int wo, T* col) {
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + static_cast<std::size_t>((c * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy + ky - pad;
          T* drow = dst + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(drow, drow + wo, T(0));
            continue;
          }
          const T* srow = x + (static_cast<std::size_t>(c) * h + iy) * w;
          const int ox_lo = std::max(0, pad - kx);
          const int ox_hi = std::min(wo, w + pad - kx);
          for (int ox = 0; ox < ox_lo; ++ox) drow[ox] = T(0);
          for (int ox = ox_lo; ox < ox_hi; ++ox) drow[ox] = srow[ox + kx - pad];
          for (int ox = std::max(ox_hi, ox_lo); ox < wo; ++ox) drow[ox] = T(0);
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, int cin, int h, int w, int k, int pad, int ho, int wo, T* dx) {
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + static_cast<std::size_t>((c * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const T* srow = src + static_cast<std::size_t>(oy) * wo;
          T* drow = dx + (static_cast<std::size_t>(c) * h + iy) * w;
          const int ox_lo = std::max(0, pad - kx);
          const int ox_hi = std::min(wo, w + pad - kx);
          for (int ox = ox_lo; ox < ox_hi; ++ox) drow[ox + kx - pad] += srow[ox];
        }
      }
    }
  }
}

// 1-D im2col over a (C, L) slice with kernel k and same padding.
template <typename T>
void im2col_1d(const T* s, int c_count, int len, int k, T* col) {
  const int pad = k / 2;
  for (int c = 0; c < c_count; ++c) {
    for (int t = 0; t < k; ++t) {
      T* dst = col + static_cast<std::size_t>(c * k + t) * len;
      const T* src = s + static_cast<std::size_t>(c) * len;
      for (int i = 0; i < len; ++i) {
        const int j = i + t - pad;
        dst[i] = (j >= 0 && j < len) ? src[j] : T(0);
      }
    }
  }
}

template <typename T>
void col2im_1d(const T* col, int c_count, int len, int k, T* ds) {
  const int pad = k / 2;
  for (int c = 0; c < c_count; ++c) {
    for (int t = 0; t < k; ++t) {
      const T* src = col + static_cast<std::size_t>(c * k + t) * len;
      T* dst = ds + static_cast<std::size_t>(c) * len;
      for (int i = 0; i < len; ++i) {
        const int j = i + t - pad;
        if (j >= 0 && j < len) dst[j] += src[i];
      }
    }
  }
}

// Slice access for intra_pass. Vertical passes slice rows (length W),
// horizontal passes slice columns (length H).
struct SliceGeometry {
  int c;
  int h;
  int w;
  bool vertical;
  int count() const { return vertical ? h : w; }
  int length() const { return vertical ? w : h; }
  std::size_t index(int ch, int slice, int pos) const {
    return vertical ? (static_cast<std::size_t>(ch) * h + slice) * w + pos
                    : (static_cast<std::size_t>(ch) * h + pos) * w + slice;
  }
};

template <typename T>
void gather_slice(const SliceGeometry& g, const T* src, int slice, T* dst) {
  const int len = g.length();
  for (int ch = 0; ch < g.c; ++ch) {
    for (int p = 0; p < len; ++p) dst[static_cast<std::size_t>(ch) * len + p] = src[g.index(ch, slice, p)];
  }
}

}  // namespace

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }
bool NoGradGuard::active() { return g_no_grad; }

template <typename T>
Tensor<T> Tensor<T>::zeros(std::vector<int> shape, bool requires_grad) {
  auto node = std::make_shared<Node<T>>();
  node->value.assign(product(shape), T(0));
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(node);
}

template <typename T>
Tensor<T> Tensor<T>::from(std::vector<int> shape, std::vector<T> values, bool requires_grad) {
  require(product(shape) == values.size(), "Tensor::from: value count does not match shape");
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value.assign(values.begin(), values.end());
  node->requires_grad = requires_grad;
  return Tensor(node);
}

template <typename T>
void Tensor<T>::backward() {
  require(numel() == 1, "backward() needs a scalar");
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node<T>* p = n->parents[i++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node<T>* n : order) n->ensure_grad();
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, int pad) {
  require_chw(x, "conv2d");
  require(weight.shape().size() == 4 && weight.dim(2) == weight.dim(3), "conv2d: weight must be (Cout,Cin,k,k)");
  const int cin = x.dim(0);
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int cout = weight.dim(0);
  const int k = weight.dim(2);
  require(weight.dim(1) == cin, "conv2d: input has " + std::to_string(cin) + " channels, weight expects " +
                                    std::to_string(weight.dim(1)));
  require(bias.numel() == static_cast<std::size_t>(cout), "conv2d: bias size");
  const int ho = h + 2 * pad - k + 1;
  const int wo = w + 2 * pad - k + 1;
  require(ho > 0 && wo > 0, "conv2d: kernel larger than padded input");
  const int kk = cin * k * k;
  const int n = ho * wo;
  const bool direct = (k == 1 && pad == 0);

  Tensor<T> out = make_result<T>({cout, ho, wo}, {&x, &weight, &bias});
  Buffer<T> col;
  const T* colp = x.data().data();
  if (!direct) {
    col.resize(static_cast<std::size_t>(kk) * n);
    im2col(x.data().data(), cin, h, w, k, pad, ho, wo, col.data());
    colp = col.data();
  }
  Eigen::Map<const RowMat<T>> wm(weight.data().data(), cout, kk);
  Eigen::Map<const RowMat<T>> cm(colp, kk, n);
  Eigen::Map<RowMat<T>> om(out.data().data(), cout, n);
  om.noalias() = wm * cm;
  for (int o = 0; o < cout; ++o) om.row(o).array() += bias.data()[static_cast<std::size_t>(o)];

  if (out.requires_grad()) {
    out.node()->backward = [cin, h, w, k, pad, ho, wo, kk, n, cout, direct](Node<T>& self) {
      auto& xn = *self.parents[0];
      auto& wn = *self.parents[1];
      auto& bn = *self.parents[2];
      Eigen::Map<const RowMat<T>> g(self.grad.data(), cout, n);
      Buffer<T> col;
      const T* colp = xn.value.data();
      if (!direct) {
        col.resize(static_cast<std::size_t>(kk) * n);
        im2col(xn.value.data(), cin, h, w, k, pad, ho, wo, col.data());
        colp = col.data();
      }
      if (wn.requires_grad) {
        wn.ensure_grad();
        Eigen::Map<const RowMat<T>> cm(colp, kk, n);
        Eigen::Map<RowMat<T>> gw(wn.grad.data(), cout, kk);
        gw.noalias() += g * cm.transpose();
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        for (int o = 0; o < cout; ++o) bn.grad[static_cast<std::size_t>(o)] += g.row(o).sum();
      }
      if (xn.requires_grad) {
        xn.ensure_grad();
        Eigen::Map<const RowMat<T>> wm(wn.value.data(), cout, kk);
        if (direct) {
          Eigen::Map<RowMat<T>> gx(xn.grad.data(), kk, n);
          gx.noalias() += wm.transpose() * g;
        } else {
          RowMat<T> gcol = wm.transpose() * g;
          col2im(gcol.data(), cin, h, w, k, pad, ho, wo, xn.grad.data());
        }
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out = make_result<T>(x.shape(), {&x});
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = xv[i] > T(0) ? xv[i] : T(0);
  if (out.requires_grad()) {
    out.node()->backward = [](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (std::size_t i = 0; i < self.value.size(); ++i) {
        if (xn.value[i] > T(0)) xn.grad[i] += self.grad[i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> out = make_result<T>(x.shape(), {&x});
  const auto& xv = x.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = T(1) / (T(1) + std::exp(-xv[i]));
  if (out.requires_grad()) {
    out.node()->backward = [](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (std::size_t i = 0; i < self.value.size(); ++i) {
        const T s = self.value[i];
        xn.grad[i] += self.grad[i] * s * (T(1) - s);
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x) {
  require_chw(x, "maxpool2");
  const int c = x.dim(0);
  const int h = x.dim(1);
  const int w = x.dim(2);
  const int ho = (h + 1) / 2;
  const int wo = (w + 1) / 2;
  Tensor<T> out = make_result<T>({c, ho, wo}, {&x});
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.numel());
  const auto& xv = x.data();
  auto& ov = out.data();
  std::size_t o = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++o) {
        T best = -std::numeric_limits<T>::infinity();
        std::uint32_t best_i = 0;
        for (int dy = 0; dy < 2; ++dy) {
          const int iy = 2 * oy + dy;
          if (iy >= h) continue;
          for (int dx = 0; dx < 2; ++dx) {
            const int ix = 2 * ox + dx;
            if (ix >= w) continue;
            const auto idx = static_cast<std::uint32_t>((static_cast<std::size_t>(ch) * h + iy) * w + ix);
            if (xv[idx] > best) {
              best = xv[idx];
              best_i = idx;
            }
          }
        }
        ov[o] = best;
        (*argmax)[o] = best_i;
      }
    }
  }
  if (out.requires_grad()) {
    out.node()->backward = [argmax](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (std::size_t i = 0; i < self.value.size(); ++i) xn.grad[(*argmax)[i]] += self.grad[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  require_chw(x, "upsample2");
  const int c = x.dim(0);
  const int h = x.dim(1);
  const int w = x.dim(2);
  Tensor<T> out = make_result<T>({c, 2 * h, 2 * w}, {&x});
  const auto& xv = x.data();
  auto& ov = out.data();
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < 2 * h; ++y) {
      const T* src = xv.data() + (static_cast<std::size_t>(ch) * h + y / 2) * w;
      T* dst = ov.data() + (static_cast<std::size_t>(ch) * 2 * h + y) * 2 * w;
      for (int xx = 0; xx < 2 * w; ++xx) dst[xx] = src[xx / 2];
    }
  }
  if (out.requires_grad()) {
    out.node()->backward = [c, h, w](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < 2 * h; ++y) {
          T* dst = xn.grad.data() + (static_cast<std::size_t>(ch) * h + y / 2) * w;
          const T* src = self.grad.data() + (static_cast<std::size_t>(ch) * 2 * h + y) * 2 * w;
          for (int xx = 0; xx < 2 * w; ++xx) dst[xx / 2] += src[xx];
        }
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b) {
  require_chw(a, "concat");
  require_chw(b, "concat");
  require(a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2),
          "concat: spatial sizes differ " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor<T> out = make_result<T>({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, {&a, &b});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.numel()));
  if (out.requires_grad()) {
    const std::size_t na = a.numel();
    out.node()->backward = [na](Node<T>& self) {
      auto& an = *self.parents[0];
      auto& bn = *self.parents[1];
      if (an.requires_grad) {
        an.ensure_grad();
        for (std::size_t i = 0; i < na; ++i) an.grad[i] += self.grad[i];
      }
      if (bn.requires_grad) {
        bn.ensure_grad();
        for (std::size_t i = 0; i < bn.value.size(); ++i) bn.grad[i] += self.grad[na + i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: shapes differ");
  Tensor<T> out = make_result<T>(a.shape(), {&a, &b});
  for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  if (out.requires_grad()) {
    out.node()->backward = [](Node<T>& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int begin, int end) {
  require_chw(x, "slice_channels");
  require(begin >= 0 && begin < end && end <= x.dim(0), "slice_channels: bad range");
  const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
  Tensor<T> out = make_result<T>({end - begin, x.dim(1), x.dim(2)}, {&x});
  const std::size_t off = static_cast<std::size_t>(begin) * plane;
  std::copy(x.data().begin() + static_cast<std::ptrdiff_t>(off),
            x.data().begin() + static_cast<std::ptrdiff_t>(off + out.numel()), out.data().begin());
  if (out.requires_grad()) {
    out.node()->backward = [off](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) xn.grad[off + i] += self.grad[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> intra_pass(const Tensor<T>& x, const Tensor<T>& weight, SliceDirection dir) {
  require_chw(x, "intra_pass");
  const int c = x.dim(0);
  require(weight.shape().size() == 3 && weight.dim(0) == c && weight.dim(1) == c && weight.dim(2) % 2 == 1,
          "intra_pass: weight must be (C,C,k) with odd k");
  const int k = weight.dim(2);
  const SliceGeometry g{c, x.dim(1), x.dim(2), dir == SliceDirection::Down || dir == SliceDirection::Up};
  const bool reverse = dir == SliceDirection::Up || dir == SliceDirection::Left;
  const int count = g.count();
  const int len = g.length();
  const auto slice_at = [count, reverse](int step) { return reverse ? count - 1 - step : step; };

  Tensor<T> out = make_result<T>(x.shape(), {&x, &weight});
  auto& ov = out.data();
  std::copy(x.data().begin(), x.data().end(), ov.begin());
  // Pre-activations per slice step (step 0 has none).
  auto pre = std::make_shared<Buffer<T>>(static_cast<std::size_t>(count) * c * len, T(0));

  Eigen::Map<const RowMat<T>> wm(weight.data().data(), c, c * k);
  Buffer<T> prev(static_cast<std::size_t>(c) * len);
  Buffer<T> col(static_cast<std::size_t>(c) * k * len);
  for (int step = 1; step < count; ++step) {
    gather_slice(g, ov.data(), slice_at(step - 1), prev.data());
    im2col_1d(prev.data(), c, len, k, col.data());
    Eigen::Map<RowMat<T>> z(pre->data() + static_cast<std::size_t>(step) * c * len, c, len);
    z.noalias() = wm * Eigen::Map<const RowMat<T>>(col.data(), c * k, len);
    const int s = slice_at(step);
    for (int ch = 0; ch < c; ++ch) {
      for (int p = 0; p < len; ++p) {
        const T v = z(ch, p);
        if (v > T(0)) ov[g.index(ch, s, p)] += v;
      }
    }
  }

  if (out.requires_grad()) {
    out.node()->backward = [g, k, count, len, c, reverse, pre](Node<T>& self) {
      auto& xn = *self.parents[0];
      auto& wn = *self.parents[1];
      const auto slice_at = [count, reverse](int step) { return reverse ? count - 1 - step : step; };
      Buffer<T> gacc = self.grad;  // running gradient w.r.t. each output slice
      Buffer<T> prev(static_cast<std::size_t>(c) * len);
      Buffer<T> col(static_cast<std::size_t>(c) * k * len);
      RowMat<T> gz(c, len);
      Eigen::Map<const RowMat<T>> wm(wn.value.data(), c, c * k);
      if (wn.requires_grad) wn.ensure_grad();
      for (int step = count - 1; step >= 1; --step) {
        const int s = slice_at(step);
        const T* z = pre->data() + static_cast<std::size_t>(step) * c * len;
        for (int ch = 0; ch < c; ++ch) {
          for (int p = 0; p < len; ++p) {
            gz(ch, p) = z[static_cast<std::size_t>(ch) * len + p] > T(0) ? gacc[g.index(ch, s, p)] : T(0);
          }
        }
        const int sp = slice_at(step - 1);
        if (wn.requires_grad) {
          gather_slice(g, self.value.data(), sp, prev.data());
          im2col_1d(prev.data(), c, len, k, col.data());
          Eigen::Map<RowMat<T>> gw(wn.grad.data(), c, c * k);
          gw.noalias() += gz * Eigen::Map<const RowMat<T>>(col.data(), c * k, len).transpose();
        }
        RowMat<T> gcol = wm.transpose() * gz;
        std::fill(prev.begin(), prev.end(), T(0));
        col2im_1d(gcol.data(), c, len, k, prev.data());
        for (int ch = 0; ch < c; ++ch) {
          for (int p = 0; p < len; ++p) gacc[g.index(ch, sp, p)] += prev[static_cast<std::size_t>(ch) * len + p];
        }
      }
      if (xn.requires_grad) {
        xn.ensure_grad();
        for (std::size_t i = 0; i < gacc.size(); ++i) xn.grad[i] += gacc[i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& x, std::span<const T> w) {
  require(w.size() == x.numel(), "weighted_sum: weight count");
  Tensor<T> out = make_result<T>({1}, {&x});
  T acc = T(0);
  for (std::size_t i = 0; i < w.size(); ++i) acc += x.data()[i] * w[i];
  out.data()[0] = acc;
  if (out.requires_grad()) {
    Buffer<T> wc(w.begin(), w.end());
    out.node()->backward = [wc = std::move(wc)](Node<T>& self) {
      auto& xn = *self.parents[0];
      xn.ensure_grad();
      for (std::size_t i = 0; i < wc.size(); ++i) xn.grad[i] += self.grad[0] * wc[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> sum_scalars(const std::vector<Tensor<T>>& xs) {
  require(!xs.empty(), "sum_scalars: empty");
  auto node = std::make_shared<Node<T>>();
  node->shape = {1};
  node->value = {T(0)};
  for (const auto& x : xs) {
    require(x.numel() == 1, "sum_scalars: operands must be scalars");
    node->value[0] += x.item();
    if (!g_no_grad && x.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (const auto& x : xs) node->parents.push_back(x.node());
    node->backward = [](Node<T>& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        p->grad[0] += self.grad[0];
      }
    };
  }
  return Tensor<T>(node);
}

#define CURB_NN_INSTANTIATE(T)                                                       \
  template class Tensor<T>;                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int); \
  template Tensor<T> relu(const Tensor<T>&);                                         \
  template Tensor<T> sigmoid(const Tensor<T>&);                                      \
  template Tensor<T> maxpool2(const Tensor<T>&);                                     \
  template Tensor<T> upsample2(const Tensor<T>&);                                    \
  template Tensor<T> concat(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> slice_channels(const Tensor<T>&, int, int);                     \
  template Tensor<T> intra_pass(const Tensor<T>&, const Tensor<T>&, SliceDirection); \
  template Tensor<T> weighted_sum(const Tensor<T>&, std::span<const T>);             \
  template Tensor<T> sum_scalars(const std::vector<Tensor<T>>&);

CURB_NN_INSTANTIATE(float)
CURB_NN_INSTANTIATE(double)

}  // namespace curb::nn
