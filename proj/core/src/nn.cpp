#include "wae/nn.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace wae::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
void require_rank(const Tensor<T>& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     t.shape_string());
  }
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

struct ConvGeometry {
  int n, in_c, h, w, out_c, k, pad;
  int hw() const { return h * w; }
  int patch() const { return in_c * k * k; }
};

// cols (c*k*k, h*w): cols[(c,u,v), (i,j)] = x[c, i+u-pad, j+v-pad] or 0.
template <typename T>
void im2col(const T* x, int channels, int h, int w, int k, int pad, T* cols) {
  const int hw = h * w;
  for (int c = 0; c < channels; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        T* row = cols + static_cast<std::size_t>((c * k + u) * k + v) * hw;
        for (int i = 0; i < h; ++i) {
          const int si = i + u - pad;
          T* dst = row + i * w;
          if (si < 0 || si >= h) {
            std::fill(dst, dst + w, T{0});
            continue;
          }
          const T* src = x + (static_cast<std::size_t>(c) * h + si) * w;
          for (int j = 0; j < w; ++j) {
            const int sj = j + v - pad;
            dst[j] = (sj >= 0 && sj < w) ? src[sj] : T{0};
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates cols into x (x must be zeroed by caller).
template <typename T>
void col2im(const T* cols, int channels, int h, int w, int k, int pad, T* x) {
  const int hw = h * w;
  for (int c = 0; c < channels; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        const T* row = cols + static_cast<std::size_t>((c * k + u) * k + v) * hw;
        for (int i = 0; i < h; ++i) {
          const int si = i + u - pad;
          if (si < 0 || si >= h) continue;
          T* dst = x + (static_cast<std::size_t>(c) * h + si) * w;
          const T* src = row + i * w;
          for (int j = 0; j < w; ++j) {
            const int sj = j + v - pad;
            if (sj >= 0 && sj < w) dst[sj] += src[j];
          }
        }
      }
    }
  }
}

// Validates shapes for conv2d (kernel (co, ci, k, k)) or transposed conv
// (kernel (ci, co, k, k)) and returns the geometry in conv terms of the
// *input* tensor.
template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& kernel, bool transposed, const char* what) {
  require_rank(input, 4, what);
  require_rank(kernel, 4, what);
  const int kin = transposed ? kernel.dim(0) : kernel.dim(1);
  const int kout = transposed ? kernel.dim(1) : kernel.dim(0);
  if (kin != input.dim(1)) {
    throw ShapeError(std::string(what) + ": kernel expects " + std::to_string(kin) +
                     " input channels, input has " + std::to_string(input.dim(1)) + " (kernel " +
                     kernel.shape_string() + ", input " + input.shape_string() + ")");
  }
  if (kernel.dim(2) != kernel.dim(3) || kernel.dim(2) % 2 == 0) {
    throw ShapeError(std::string(what) + ": kernel must be square with odd size, got " + kernel.shape_string());
  }
  return ConvGeometry{input.dim(0), input.dim(1), input.dim(2), input.dim(3), kout, kernel.dim(2),
                      kernel.dim(2) / 2};
}

template <typename T>
void add_bias(Tensor<T>& out, const Tensor<T>& bias) {
  const int n = out.dim(0), c = out.dim(1);
  const std::size_t plane = static_cast<std::size_t>(out.dim(2)) * out.dim(3);
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      T* p = out.data() + (static_cast<std::size_t>(b) * c + ch) * plane;
      const T v = bias[ch];
      for (std::size_t i = 0; i < plane; ++i) p[i] += v;
    }
  }
}

template <typename T>
Tensor<T> bias_grad(const Tensor<T>& grad_out) {
  const int n = grad_out.dim(0), c = grad_out.dim(1);
  const std::size_t plane = static_cast<std::size_t>(grad_out.dim(2)) * grad_out.dim(3);
  Tensor<T> g({c});
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const T* p = grad_out.data() + (static_cast<std::size_t>(b) * c + ch) * plane;
      T s{0};
      for (std::size_t i = 0; i < plane; ++i) s += p[i];
      g[ch] += s;
    }
  }
  return g;
}

template <typename T>
void debug_check(const Tensor<T>& t, const char* what) {
#ifndef NDEBUG
  check_finite(t, what);
#else
  (void)t;
  (void)what;
#endif
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias) {
  const auto g = conv_geometry(input, kernel, false, "conv2d");
  if (bias.size() != static_cast<std::size_t>(g.out_c)) throw ShapeError("conv2d: bias size mismatch");
  Tensor<T> out({g.n, g.out_c, g.h, g.w});
  std::vector<T> cols(static_cast<std::size_t>(g.patch()) * g.hw());
  ConstMatMap<T> K(kernel.data(), g.out_c, g.patch());
  for (int b = 0; b < g.n; ++b) {
    im2col(input.data() + static_cast<std::size_t>(b) * g.in_c * g.hw(), g.in_c, g.h, g.w, g.k, g.pad, cols.data());
    ConstMatMap<T> C(cols.data(), g.patch(), g.hw());
    MatMap<T> Y(out.data() + static_cast<std::size_t>(b) * g.out_c * g.hw(), g.out_c, g.hw());
    Y.noalias() = K * C;
  }
  add_bias(out, bias);
  debug_check(out, "conv2d output");
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& grad_out) {
  const auto g = conv_geometry(input, kernel, false, "conv2d_backward");
  if (grad_out.shape() != std::vector<int>{g.n, g.out_c, g.h, g.w}) {
    throw ShapeError("conv2d_backward: grad_out shape " + grad_out.shape_string());
  }
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(kernel.shape()), bias_grad(grad_out)};
  std::vector<T> cols(static_cast<std::size_t>(g.patch()) * g.hw());
  std::vector<T> dcols(cols.size());
  ConstMatMap<T> K(kernel.data(), g.out_c, g.patch());
  MatMap<T> dK(grads.kernel.data(), g.out_c, g.patch());
  for (int b = 0; b < g.n; ++b) {
    const std::size_t in_off = static_cast<std::size_t>(b) * g.in_c * g.hw();
    im2col(input.data() + in_off, g.in_c, g.h, g.w, g.k, g.pad, cols.data());
    ConstMatMap<T> C(cols.data(), g.patch(), g.hw());
    ConstMatMap<T> dY(grad_out.data() + static_cast<std::size_t>(b) * g.out_c * g.hw(), g.out_c, g.hw());
    dK.noalias() += dY * C.transpose();
    MatMap<T> dC(dcols.data(), g.patch(), g.hw());
    dC.noalias() = K.transpose() * dY;
    col2im(dcols.data(), g.in_c, g.h, g.w, g.k, g.pad, grads.input.data() + in_off);
  }
  return grads;
}

template <typename T>
Tensor<T> transposed_conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias) {
  const auto g = conv_geometry(input, kernel, true, "transposed_conv2d");
  if (bias.size() != static_cast<std::size_t>(g.out_c)) throw ShapeError("transposed_conv2d: bias size mismatch");
  Tensor<T> out({g.n, g.out_c, g.h, g.w});
  const int patch = g.out_c * g.k * g.k;
  std::vector<T> cols(static_cast<std::size_t>(patch) * g.hw());
  ConstMatMap<T> K(kernel.data(), g.in_c, patch);
  for (int b = 0; b < g.n; ++b) {
    ConstMatMap<T> X(input.data() + static_cast<std::size_t>(b) * g.in_c * g.hw(), g.in_c, g.hw());
    MatMap<T> C(cols.data(), patch, g.hw());
    C.noalias() = K.transpose() * X;
    col2im(cols.data(), g.out_c, g.h, g.w, g.k, g.pad, out.data() + static_cast<std::size_t>(b) * g.out_c * g.hw());
  }
  add_bias(out, bias);
  debug_check(out, "transposed_conv2d output");
  return out;
}

template <typename T>
ConvGrads<T> transposed_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& grad_out) {
  const auto g = conv_geometry(input, kernel, true, "transposed_conv2d_backward");
  if (grad_out.shape() != std::vector<int>{g.n, g.out_c, g.h, g.w}) {
    throw ShapeError("transposed_conv2d_backward: grad_out shape " + grad_out.shape_string());
  }
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(kernel.shape()), bias_grad(grad_out)};
  const int patch = g.out_c * g.k * g.k;
  std::vector<T> cols(static_cast<std::size_t>(patch) * g.hw());
  ConstMatMap<T> K(kernel.data(), g.in_c, patch);
  MatMap<T> dK(grads.kernel.data(), g.in_c, patch);
  for (int b = 0; b < g.n; ++b) {
    im2col(grad_out.data() + static_cast<std::size_t>(b) * g.out_c * g.hw(), g.out_c, g.h, g.w, g.k, g.pad,
           cols.data());
    ConstMatMap<T> C(cols.data(), patch, g.hw());
    const std::size_t in_off = static_cast<std::size_t>(b) * g.in_c * g.hw();
    ConstMatMap<T> X(input.data() + in_off, g.in_c, g.hw());
    MatMap<T> dX(grads.input.data() + in_off, g.in_c, g.hw());
    dX.noalias() = K * C;
    dK.noalias() += X * C.transpose();
  }
  return grads;
}

template <typename T>
PoolResult<T> maxpool2x2(const Tensor<T>& input) {
  require_rank(input, 4, "maxpool2x2");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h < 2 || w < 2) throw ShapeError("maxpool2x2: spatial size must be at least 2x2, got " + input.shape_string());
  const int oh = h / 2, ow = w / 2;
  PoolResult<T> r{Tensor<T>({n, c, oh, ow}), {}};
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t base = (static_cast<std::size_t>(b) * c + ch) * h * w;
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j, ++o) {
          std::size_t best = base + static_cast<std::size_t>(2 * i) * w + 2 * j;
          for (int di = 0; di < 2; ++di) {
            for (int dj = 0; dj < 2; ++dj) {
              const std::size_t idx = base + static_cast<std::size_t>(2 * i + di) * w + 2 * j + dj;
              if (input[idx] > input[best]) best = idx;
            }
          }
          r.output[o] = input[best];
          r.argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const std::vector<int>& input_shape) {
  if (argmax.size() != grad_out.size()) throw ShapeError("maxpool2x2_backward: argmax size mismatch");
  Tensor<T> dx(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += grad_out[i];
  return dx;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out = input;
  for (auto& v : out.values()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  require_same(input, grad_out, "relu_backward");
  Tensor<T> dx = grad_out;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(input[i] > T{0})) dx[i] = T{0};
  }
  return dx;
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& input) {
  require_rank(input, 4, "upsample_nearest2x");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  Tensor<T> out({n, c, 2 * h, 2 * w});
  for (int p = 0; p < n * c; ++p) {
    const T* src = input.data() + static_cast<std::size_t>(p) * h * w;
    T* dst = out.data() + static_cast<std::size_t>(p) * 4 * h * w;
    for (int i = 0; i < 2 * h; ++i) {
      for (int j = 0; j < 2 * w; ++j) dst[static_cast<std::size_t>(i) * 2 * w + j] = src[(i / 2) * w + j / 2];
    }
  }
  return out;
}

template <typename T>
Tensor<T> upsample_nearest2x_backward(const Tensor<T>& grad_out) {
  require_rank(grad_out, 4, "upsample_nearest2x_backward");
  const int n = grad_out.dim(0), c = grad_out.dim(1), h2 = grad_out.dim(2), w2 = grad_out.dim(3);
  if (h2 % 2 || w2 % 2) throw ShapeError("upsample_nearest2x_backward: odd spatial size " + grad_out.shape_string());
  const int h = h2 / 2, w = w2 / 2;
  Tensor<T> dx({n, c, h, w});
  for (int p = 0; p < n * c; ++p) {
    const T* src = grad_out.data() + static_cast<std::size_t>(p) * h2 * w2;
    T* dst = dx.data() + static_cast<std::size_t>(p) * h * w;
    for (int i = 0; i < h2; ++i) {
      for (int j = 0; j < w2; ++j) dst[(i / 2) * w + j / 2] += src[static_cast<std::size_t>(i) * w2 + j];
    }
  }
  return dx;
}

namespace {

// Visits every element of channel `ch` for rank-2 or rank-4 tensors.
struct ChannelLayout {
  int n, c;
  std::size_t plane;  // elements per (sample, channel)
  std::size_t count() const { return static_cast<std::size_t>(n) * plane; }
  std::size_t index(int b, int ch, std::size_t i) const {
    return (static_cast<std::size_t>(b) * c + ch) * plane + i;
  }
};

template <typename T>
ChannelLayout channel_layout(const Tensor<T>& t) {
  if (t.rank() == 2) return {t.dim(0), t.dim(1), 1};
  if (t.rank() == 4) return {t.dim(0), t.dim(1), static_cast<std::size_t>(t.dim(2)) * t.dim(3)};
  throw ShapeError("batchnorm: expected rank 2 or 4, got " + t.shape_string());
}

}  // namespace

namespace {

// `update` receives the running-statistics update in train mode.
template <typename T>
Tensor<T> batchnorm_impl(const Tensor<T>& input, const BatchNorm<T>& bn, Mode mode, BatchNormCache<T>* cache,
                         BatchNorm<T>* update) {
  const auto L = channel_layout(input);
  if (bn.gamma.size() != static_cast<std::size_t>(L.c)) {
    throw ShapeError("batchnorm: " + std::to_string(bn.gamma.size()) + " channels configured, input " +
                     input.shape_string());
  }
  Tensor<T> out(input.shape());
  Tensor<T> xhat(input.shape());
  std::vector<T> inv_std(L.c);
  const T eps = static_cast<T>(kBatchNormEpsilon);

  for (int ch = 0; ch < L.c; ++ch) {
    T mean, var;
    if (mode == Mode::kTrain) {
      const std::size_t m = L.count();
      if (m < 2) {
        throw PreconditionError("batchnorm: train mode needs at least two values per channel (batch of " +
                                std::to_string(L.n) + ")");
      }
      T sum{0};
      for (int b = 0; b < L.n; ++b)
        for (std::size_t i = 0; i < L.plane; ++i) sum += input[L.index(b, ch, i)];
      mean = sum / static_cast<T>(m);
      T sq{0};
      for (int b = 0; b < L.n; ++b)
        for (std::size_t i = 0; i < L.plane; ++i) {
          const T d = input[L.index(b, ch, i)] - mean;
          sq += d * d;
        }
      var = sq / static_cast<T>(m);
      const T mom = static_cast<T>(kBatchNormMomentum);
      update->running_mean[ch] = (T{1} - mom) * bn.running_mean[ch] + mom * mean;
      update->running_var[ch] = (T{1} - mom) * bn.running_var[ch] + mom * (sq / static_cast<T>(m - 1));
    } else {
      mean = bn.running_mean[ch];
      var = bn.running_var[ch];
    }
    const T is = T{1} / std::sqrt(var + eps);
    inv_std[ch] = is;
    const T gamma = bn.gamma[ch], beta = bn.beta[ch];
    for (int b = 0; b < L.n; ++b) {
      for (std::size_t i = 0; i < L.plane; ++i) {
        const std::size_t idx = L.index(b, ch, i);
        const T xh = (input[idx] - mean) * is;
        xhat[idx] = xh;
        out[idx] = gamma * xh + beta;
      }
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, BatchNorm<T>& bn, Mode mode, BatchNormCache<T>* cache) {
  return batchnorm_impl(input, bn, mode, cache, &bn);
}

template <typename T>
Tensor<T> batchnorm_eval(const Tensor<T>& input, const BatchNorm<T>& bn, BatchNormCache<T>* cache) {
  return batchnorm_impl<T>(input, bn, Mode::kEval, cache, nullptr);
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BatchNorm<T>& bn,
                                     const BatchNormCache<T>& cache) {
  require_same(grad_out, cache.normalized, "batchnorm_backward");
  const auto L = channel_layout(grad_out);
  BatchNormGrads<T> g{Tensor<T>(grad_out.shape()), Tensor<T>({L.c}), Tensor<T>({L.c})};
  const T m = static_cast<T>(L.count());
  for (int ch = 0; ch < L.c; ++ch) {
    T sum_dy{0}, sum_dy_xhat{0};
    for (int b = 0; b < L.n; ++b)
      for (std::size_t i = 0; i < L.plane; ++i) {
        const std::size_t idx = L.index(b, ch, i);
        sum_dy += grad_out[idx];
        sum_dy_xhat += grad_out[idx] * cache.normalized[idx];
      }
    g.beta[ch] = sum_dy;
    g.gamma[ch] = sum_dy_xhat;
    const T scale = bn.gamma[ch] * cache.inv_std[ch];
    for (int b = 0; b < L.n; ++b)
      for (std::size_t i = 0; i < L.plane; ++i) {
        const std::size_t idx = L.index(b, ch, i);
        if (cache.mode == Mode::kTrain) {
          g.input[idx] = scale / m * (m * grad_out[idx] - sum_dy - cache.normalized[idx] * sum_dy_xhat);
        } else {
          g.input[idx] = scale * grad_out[idx];
        }
      }
  }
  return g;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input, 2, "linear");
  require_rank(weight, 2, "linear");
  if (weight.dim(1) != input.dim(1)) {
    throw ShapeError("linear: weight " + weight.shape_string() + " does not accept input " + input.shape_string());
  }
  if (bias.size() != static_cast<std::size_t>(weight.dim(0))) throw ShapeError("linear: bias size mismatch");
  const int n = input.dim(0), din = input.dim(1), dout = weight.dim(0);
  Tensor<T> out({n, dout});
  ConstMatMap<T> X(input.data(), n, din);
  ConstMatMap<T> W(weight.data(), dout, din);
  MatMap<T> Y(out.data(), n, dout);
  Y.noalias() = X * W.transpose();
  for (int b = 0; b < n; ++b)
    for (int o = 0; o < dout; ++o) out[static_cast<std::size_t>(b) * dout + o] += bias[o];
  debug_check(out, "linear output");
  return out;
}

template <typename T>
ConvGrads<T> linear_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& grad_out) {
  const int n = input.dim(0), din = input.dim(1), dout = weight.dim(0);
  if (grad_out.shape() != std::vector<int>{n, dout}) throw ShapeError("linear_backward: grad_out shape");
  ConvGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(weight.shape()), Tensor<T>({dout})};
  ConstMatMap<T> X(input.data(), n, din);
  ConstMatMap<T> W(weight.data(), dout, din);
  ConstMatMap<T> dY(grad_out.data(), n, dout);
  MatMap<T>(g.input.data(), n, din).noalias() = dY * W;
  MatMap<T>(g.kernel.data(), dout, din).noalias() = dY.transpose() * X;
  for (int b = 0; b < n; ++b)
    for (int o = 0; o < dout; ++o) g.bias[o] += grad_out[static_cast<std::size_t>(b) * dout + o];
  return g;
}

template <typename T>
T mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  require_same(prediction, target, "mse_loss");
  if (prediction.empty()) return T{0};
  T s{0};
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const T d = prediction[i] - target[i];
    s += d * d;
  }
  return s / static_cast<T>(prediction.size());
}

template <typename T>
Tensor<T> mse_loss_backward(const Tensor<T>& prediction, const Tensor<T>& target) {
  require_same(prediction, target, "mse_loss_backward");
  Tensor<T> g(prediction.shape());
  const T scale = T{2} / static_cast<T>(std::max<std::size_t>(prediction.size(), 1));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (prediction[i] - target[i]);
  return g;
}

template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, T lr, T momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeError("sgd_step: parameter, gradient and velocity sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grads[i];
    params[i] -= lr * velocity[i];
  }
}

template <typename T>
void init_uniform(Tensor<T>& t, int fan_in, SplitMix64& rng) {
  const double bound = std::sqrt(6.0 / std::max(fan_in, 1));
  for (auto& v : t.values()) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
}

template <typename T>
void check_finite(const Tensor<T>& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      throw TrainingError(std::string(what) + ": non-finite value at element " + std::to_string(i));
    }
  }
}

#define WAE_INSTANTIATE(T)                                                                              \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> transposed_conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template ConvGrads<T> transposed_conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template PoolResult<T> maxpool2x2(const Tensor<T>&);                                                  \
  template Tensor<T> maxpool2x2_backward(const Tensor<T>&, const std::vector<std::uint32_t>&,           \
                                         const std::vector<int>&);                                      \
  template Tensor<T> relu(const Tensor<T>&);                                                            \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> upsample_nearest2x(const Tensor<T>&);                                              \
  template Tensor<T> upsample_nearest2x_backward(const Tensor<T>&);                                     \
  template Tensor<T> batchnorm(const Tensor<T>&, BatchNorm<T>&, Mode, BatchNormCache<T>*);              \
  template Tensor<T> batchnorm_eval(const Tensor<T>&, const BatchNorm<T>&, BatchNormCache<T>*);         \
  template BatchNormGrads<T> batchnorm_backward(const Tensor<T>&, const BatchNorm<T>&,                   \
                                                const BatchNormCache<T>&);                              \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template ConvGrads<T> linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template T mse_loss(const Tensor<T>&, const Tensor<T>&);                                              \
  template Tensor<T> mse_loss_backward(const Tensor<T>&, const Tensor<T>&);                             \
  template void sgd_step(std::span<T>, std::span<const T>, std::span<T>, T, T);                         \
  template void init_uniform(Tensor<T>&, int, SplitMix64&);                                             \
  template void check_finite(const Tensor<T>&, const char*);

WAE_INSTANTIATE(float)
WAE_INSTANTIATE(double)

#undef WAE_INSTANTIATE

}  // namespace wae::nn
