#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wae/checkpoint.hpp"
#include "wae/nn.hpp"
#include "wae/training.hpp"
#include "wae/ui_model.hpp"
#include "wae/wirifier.hpp"

namespace wae {

// ---- Color histogram -------------------------------------------------------

inline constexpr int kDefaultHistogramBins = 32;

/// Per-channel L1-normalized histograms, bins stored channel after channel.
struct HistogramFeature {
  int bins = kDefaultHistogramBins;
  std::vector<double> values;  // 3 * bins
};

/// Bin index floor(v * B) clamped to [0, B-1]. Requires 3 channels.
HistogramFeature histogram_feature(const WireframeImage& image, int bins = kDefaultHistogramBins);
/// Sum over channels of the L2 distance between the channel histograms.
double histogram_distance(const HistogramFeature& a, const HistogramFeature& b);

// ---- Maximum-weight bipartite matching ------------------------------------

struct Matching {
  std::int64_t weight = 0;
  std::vector<int> row_to_col;  // -1 when the row is unmatched
};

/// Maximum-weight matching (Hungarian method) of a rows x cols matrix of
/// non-negative weights, row-major. Pairs of weight 0 count as unmatched.
Matching max_weight_matching(std::span<const std::int64_t> weights, int rows, int cols);

// ---- GUIFetch ---------------------------------------------------------------

struct GuiFetchConfig {
  // Pixel thresholds at the reference resolution; scaled with the query extent.
  int x_threshold = 10;
  int y_threshold = 10;
  int width_threshold = 10;
  int height_threshold = 10;
  int reference_width = 1080;
  int reference_height = 1920;
  int award = 10;

  /// Thresholds in the pixel space of a screen_w x screen_h query.
  GuiFetchConfig scaled_to(int screen_w, int screen_h) const;
  int max_pair_score() const { return 4 * award; }
};

/// 0 for differing types, else `award` per factor (left, top, width,
/// height) whose absolute difference is within its threshold. Thresholds are
/// used as given (no scaling).
int pair_score(const UIComponent& a, const UIComponent& b, const GuiFetchConfig& cfg);

/// Matched score over 40 * |query components|, in [0, 1]. Thresholds are
/// scaled to the query extent and candidate bounds are mapped into the
/// query's extent when they differ. Throws PreconditionError on an empty query.
double guifetch_similarity(const UIScreen& query, const UIScreen& candidate, const GuiFetchConfig& cfg = {});

// ---- Fully connected autoencoder ------------------------------------------

inline constexpr std::array<int, 3> kFcAeHidden = {2048, 256, 64};

struct FcAeConfig {
  int width = 50;
  int height = 64;
  SgdSettings sgd{.lr = 0.01f, .momentum = 0.0f};

  int input_dim() const { return 2 * width * height; }
  RasterSize raster() const { return {width, height}; }
  std::string to_json() const;
  static FcAeConfig from_json(const std::string& text);
  friend bool operator==(const FcAeConfig&, const FcAeConfig&) = default;
};

/// Six linear layers input -> 2048 -> 256 -> 64 -> 256 -> 2048 -> input with
/// ReLU between consecutive layers (none after the code or the output).
class FcAeModel {
 public:
  static constexpr int kLayers = 6;

  explicit FcAeModel(const FcAeConfig& config);

  const FcAeConfig& config() const { return config_; }
  /// 64-dim code of the text/non-text raster of `screen`.
  std::vector<float> encode(const UIScreen& screen) const;
  std::vector<float> encode(const WireframeImage& mask) const;
  double evaluate_loss(std::span<const WireframeImage> masks) const;

  float train_step(const nn::Tensor<float>& batch);

  Checkpoint to_checkpoint() const;
  static FcAeModel from_checkpoint(const Checkpoint& ckpt);
  void save(const std::string& path) const;
  static FcAeModel load(const std::string& path);
  Digest fingerprint() const;

 private:
  nn::Tensor<float> flatten(const nn::Tensor<float>& batch) const;

  FcAeConfig config_;
  std::array<nn::Tensor<float>, kLayers> weight_;
  std::array<nn::Tensor<float>, kLayers> bias_;
  std::vector<nn::Tensor<float>> grads_;
  std::vector<nn::Tensor<float>> velocity_;
};

struct FcAeTrainResult {
  FcAeModel model;
  std::vector<float> loss_history;
  bool flagged = false;
  int steps = 0;
};

/// Trains on 2-channel masks from render_text_mask.
FcAeTrainResult train_fcae(const FcAeConfig& config, std::span<const WireframeImage> masks,
                           const TrainOptions& options = {});

std::vector<float> fcae_encode(const FcAeModel& model, const UIScreen& screen);

}  // namespace wae
