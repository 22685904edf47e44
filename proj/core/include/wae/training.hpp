#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wae/tensor.hpp"
#include "wae/wirifier.hpp"

namespace wae {

/// Mini-batch SGD hyper-parameters shared by both autoencoders.
struct SgdSettings {
  float lr = 0.01f;
  float momentum = 0.9f;
  int batch_size = 32;
  int epochs = 50;
  std::uint64_t seed = 1;
  friend bool operator==(const SgdSettings&, const SgdSettings&) = default;
};

struct TrainOptions {
  std::string checkpoint_path;  // rewritten after every epoch when non-empty
  int max_steps = 0;            // stop after this many SGD steps; 0 = no limit
  std::function<void(int epoch, float loss)> on_epoch;
};

/// Set when the 5-epoch moving average of the loss rises by more than 10 %
/// between consecutive epochs.
inline constexpr int kLossSmoothingWindow = 5;
inline constexpr double kLossRiseTolerance = 0.10;
bool loss_history_flagged(std::span<const float> history);

/// Stacks HWC images into an (n, c, h, w) tensor.
nn::Tensor<float> images_to_tensor(std::span<const WireframeImage> images);
nn::Tensor<float> images_to_tensor(std::span<const WireframeImage> images, std::span<const std::size_t> order);
/// Sample `index` of an (n, c, h, w) tensor back to HWC.
WireframeImage tensor_to_image(const nn::Tensor<float>& t, int index = 0, bool clamp = true);

}  // namespace wae
