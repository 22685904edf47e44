#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wae/checkpoint.hpp"
#include "wae/nn.hpp"
#include "wae/training.hpp"
#include "wae/wirifier.hpp"

namespace wae {

inline constexpr std::array<int, 4> kEncoderChannels = {16, 32, 32, 64};
inline constexpr std::array<int, 3> kDecoderHiddenChannels = {32, 32, 16};
inline constexpr int kKernelSize = 3;

struct WaeConfig {
  int width = 48;   // multiple of 16
  int height = 64;  // multiple of 16
  RepresentationMode mode = RepresentationMode::kColor;
  SgdSettings sgd;

  int channels() const { return mode_channels(mode); }
  RasterSize raster() const { return {width, height}; }
  int latent_dim() const { return kEncoderChannels[3] * (width / 16) * (height / 16); }
  /// Throws PreconditionError when the raster is not divisible by 16.
  void validate() const;

  std::string to_json() const;
  /// Missing keys keep their defaults. Throws FieldError.
  static WaeConfig from_json(const std::string& text);

  friend bool operator==(const WaeConfig&, const WaeConfig&) = default;
};

/// Convolutional autoencoder. Encoder blocks are conv, ReLU, 2x2 max-pool,
/// batch-norm; decoder blocks are nearest 2x upsample then transposed conv,
/// with ReLU on all but the last block.
class WaeModel {
 public:
  explicit WaeModel(const WaeConfig& config);

  const WaeConfig& config() const { return config_; }
  int latent_dim() const { return config_.latent_dim(); }

  /// Eval-mode latent of one image. Throws ShapeError on a size mismatch.
  std::vector<float> encode(const WireframeImage& image) const;
  std::vector<float> encode(const UIScreen& screen) const;
  /// Raw (unclamped) reconstruction, shape (1, c, h, w).
  nn::Tensor<float> decode(std::span<const float> latent) const;
  nn::Tensor<float> reconstruct(const WireframeImage& image) const;
  /// Eval-mode mean reconstruction MSE over the images.
  double evaluate_loss(std::span<const WireframeImage> images) const;

  /// |d MSE / d input|, max over channels, min-max scaled to [0, 1];
  /// row-major (h, w). The reconstruction target is held constant.
  std::vector<float> saliency(const WireframeImage& image) const;

  /// One SGD step on an (n, c, h, w) batch in train mode; returns the
  /// pre-update loss.
  float train_step(const nn::Tensor<float>& batch);

  Checkpoint to_checkpoint() const;
  static WaeModel from_checkpoint(const Checkpoint& ckpt);
  void save(const std::string& path) const;
  static WaeModel load(const std::string& path);
  /// SHA-256 of the checkpoint bytes.
  Digest fingerprint() const;

  struct Cache;

 private:
  using BatchNormStats = std::array<nn::BatchNorm<float>, 4>;

  nn::Tensor<float> to_input(const WireframeImage& image) const;
  // Train mode writes the updated running statistics to `stats`.
  nn::Tensor<float> encode_forward(const nn::Tensor<float>& x, nn::Mode mode, Cache* cache,
                                   BatchNormStats* stats) const;
  nn::Tensor<float> decode_forward(const nn::Tensor<float>& z, Cache* cache) const;
  // Returns d loss / d input; parameter gradients are accumulated into
  // `param_grads` (in parameters() order) when it is non-null.
  nn::Tensor<float> backward(const Cache& cache, const nn::Tensor<float>& grad_out,
                             std::vector<nn::Tensor<float>>* param_grads) const;

  std::vector<nn::Tensor<float>*> parameters();

  WaeConfig config_;
  std::array<nn::Tensor<float>, 4> enc_kernel_;
  std::array<nn::Tensor<float>, 4> enc_bias_;
  std::array<nn::BatchNorm<float>, 4> bn_;
  std::array<nn::Tensor<float>, 4> dec_kernel_;
  std::array<nn::Tensor<float>, 4> dec_bias_;
  std::vector<nn::Tensor<float>> grads_;
  std::vector<nn::Tensor<float>> velocity_;
};

struct WaeTrainResult {
  WaeModel model;
  std::vector<float> loss_history;  // mean train-mode loss per epoch
  bool flagged = false;             // see loss_history_flagged
  int steps = 0;
};

/// Seeded mini-batch SGD on the reconstruction MSE. Throws PreconditionError
/// for an empty corpus or a batch larger than the corpus, TrainingError on a
/// non-finite loss.
WaeTrainResult train_wae(const WaeConfig& config, std::span<const WireframeImage> corpus,
                         const TrainOptions& options = {});

}  // namespace wae
