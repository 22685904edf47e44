#include "wae/training.hpp"

#include <algorithm>
#include <numeric>

#include "wae/errors.hpp"

namespace wae {

bool loss_history_flagged(std::span<const float> history) {
  double prev = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(kLossSmoothingWindow) ? i + 1 - kLossSmoothingWindow : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += history[j];
    const double smoothed = sum / static_cast<double>(i - lo + 1);
    if (i > 0 && smoothed > prev * (1.0 + kLossRiseTolerance)) return true;
    prev = smoothed;
  }
  return false;
}

nn::Tensor<float> images_to_tensor(std::span<const WireframeImage> images) {
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  return images_to_tensor(images, order);
}

nn::Tensor<float> images_to_tensor(std::span<const WireframeImage> images, std::span<const std::size_t> order) {
  if (order.empty()) throw PreconditionError("cannot batch zero images");
  const auto& first = images[order[0]];
  const int w = first.width, h = first.height, c = first.channels;
  nn::Tensor<float> t({static_cast<int>(order.size()), c, h, w});
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (std::size_t b = 0; b < order.size(); ++b) {
    const auto& img = images[order[b]];
    if (img.width != w || img.height != h || img.channels != c) {
      throw ShapeError("images in a batch must share one size");
    }
    float* dst = t.data() + b * plane * c;
    for (std::size_t p = 0; p < plane; ++p) {
      for (int ch = 0; ch < c; ++ch) dst[ch * plane + p] = img.values[p * c + ch];
    }
  }
  return t;
}

WireframeImage tensor_to_image(const nn::Tensor<float>& t, int index, bool clamp) {
  if (t.rank() != 4) throw ShapeError("tensor_to_image: expected rank 4, got " + t.shape_string());
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  WireframeImage img{w, h, c, std::vector<float>(static_cast<std::size_t>(w) * h * c)};
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  const float* src = t.data() + static_cast<std::size_t>(index) * plane * c;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int ch = 0; ch < c; ++ch) {
      float v = src[ch * plane + p];
      if (clamp) v = std::clamp(v, 0.0f, 1.0f);
      img.values[p * c + ch] = v;
    }
  }
  return img;
}

}  // namespace wae
