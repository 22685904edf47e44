#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wae/rng.hpp"
#include "wae/tensor.hpp"

// Forward and backward kernels for the fixed layer set of the autoencoders.
// Every op is instantiated for float (training) and double (gradient checks).
namespace wae::nn {

enum class Mode { kTrain, kEval };

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernel;
  Tensor<T> bias;
};

// Stride-1 cross-correlation with zero same-padding.
// input (n, ci, h, w), kernel (co, ci, k, k) with odd k, bias (co).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias);
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& grad_out);

// Adjoint of conv2d with a shared kernel: input (n, ci, h, w),
// kernel (ci, co, k, k), bias (co); output (n, co, h, w).
template <typename T>
Tensor<T> transposed_conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias);
template <typename T>
ConvGrads<T> transposed_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel,
                                        const Tensor<T>& grad_out);

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

// 2x2 window, stride 2; a trailing odd row/column is dropped. Ties go to the
// first maximum in row-major window order.
template <typename T>
PoolResult<T> maxpool2x2(const Tensor<T>& input);
template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                              const std::vector<int>& input_shape);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);
// Gradient is passed where input > 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& input);
template <typename T>
Tensor<T> upsample_nearest2x_backward(const Tensor<T>& grad_out);

inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kBatchNormEpsilon = 1e-5;

/// Per-channel batch normalization over (n, h, w) for 4-D inputs or over n
/// for 2-D inputs.
template <typename T>
struct BatchNorm {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;

  explicit BatchNorm(int channels = 0)
      : gamma({channels}, T{1}), beta({channels}, T{0}),
        running_mean({channels}, T{0}), running_var({channels}, T{1}) {}
};

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::kEval;
  Tensor<T> normalized;       // x_hat
  std::vector<T> inv_std;     // per channel
};

/// Train mode normalizes with batch statistics (biased variance) and folds
/// them into the running statistics with momentum 0.1 (unbiased variance).
/// Throws PreconditionError in train mode when a channel has fewer than two
/// values to normalize over.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, BatchNorm<T>& bn, Mode mode, BatchNormCache<T>* cache);

/// Eval-mode normalization that never touches the running statistics.
template <typename T>
Tensor<T> batchnorm_eval(const Tensor<T>& input, const BatchNorm<T>& bn, BatchNormCache<T>* cache = nullptr);

template <typename T>
struct BatchNormGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

template <typename T>
BatchNormGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BatchNorm<T>& bn,
                                     const BatchNormCache<T>& cache);

// Fully connected: input (n, d_in), weight (d_out, d_in), bias (d_out).
template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);
template <typename T>
ConvGrads<T> linear_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& grad_out);

/// Mean of squared differences over all elements.
template <typename T>
T mse_loss(const Tensor<T>& prediction, const Tensor<T>& target);
/// d loss / d prediction = 2 (prediction - target) / N.
template <typename T>
Tensor<T> mse_loss_backward(const Tensor<T>& prediction, const Tensor<T>& target);

/// v <- momentum * v + g; p <- p - lr * v.
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, T lr, T momentum);

/// Uniform on +/- sqrt(6 / fan_in).
template <typename T>
void init_uniform(Tensor<T>& t, int fan_in, SplitMix64& rng);

/// Throws TrainingError naming `what` if any value is NaN or infinite.
template <typename T>
void check_finite(const Tensor<T>& t, const char* what);

}  // namespace wae::nn
