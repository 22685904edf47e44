#include "wae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "sgd_loop.hpp"
#include "wae/errors.hpp"
#include "wae/rng.hpp"

namespace wae {

using nn::Tensor;
using nlohmann::json;

HistogramFeature histogram_feature(const WireframeImage& image, int bins) {
  if (image.channels != 3) {
    throw PreconditionError("histogram feature needs a 3-channel image, got " + std::to_string(image.channels));
  }
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");
  HistogramFeature f{bins, std::vector<double>(static_cast<std::size_t>(3 * bins), 0.0)};
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  std::array<std::vector<std::uint64_t>, 3> counts;
  for (auto& c : counts) c.assign(static_cast<std::size_t>(bins), 0);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (int c = 0; c < 3; ++c) {
      const double v = image.values[p * 3 + c];
      int bin = static_cast<int>(std::floor(v * bins));
      bin = std::clamp(bin, 0, bins - 1);
      ++counts[c][bin];
    }
  }
  if (pixels == 0) return f;
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < bins; ++b) {
      f.values[static_cast<std::size_t>(c * bins + b)] =
          static_cast<double>(counts[c][b]) / static_cast<double>(pixels);
    }
  }
  return f;
}

double histogram_distance(const HistogramFeature& a, const HistogramFeature& b) {
  if (a.bins != b.bins || a.values.size() != b.values.size()) {
    throw ShapeError("histograms have different bin counts");
  }
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    double sq = 0.0;
    for (int k = 0; k < a.bins; ++k) {
      const double d = a.values[static_cast<std::size_t>(c * a.bins + k)] - b.values[static_cast<std::size_t>(c * a.bins + k)];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total;
}

Matching max_weight_matching(std::span<const std::int64_t> weights, int rows, int cols) {
  if (rows < 0 || cols < 0 || weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matching weight matrix does not match its dimensions");
  }
  Matching result;
  result.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) return result;
  const int n = std::max(rows, cols);
  std::int64_t max_w = 0;
  for (auto w : weights) {
    if (w < 0) throw PreconditionError("matching weights must be non-negative");
    max_w = std::max(max_w, w);
  }
  // Minimum-cost assignment on the padded square matrix, cost = max_w - w.
  auto cost = [&](int i, int j) -> std::int64_t {
    if (i >= rows || j >= cols) return max_w;
    return max_w - weights[static_cast<std::size_t>(i) * cols + j];
  };
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      std::int64_t delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    const int c = j - 1;
    if (i < rows && c < cols) {
      const std::int64_t w = weights[static_cast<std::size_t>(i) * cols + c];
      if (w > 0) {
        result.row_to_col[static_cast<std::size_t>(i)] = c;
        result.weight += w;
      }
    }
  }
  return result;
}

GuiFetchConfig GuiFetchConfig::scaled_to(int screen_w, int screen_h) const {
  auto scale = [](int t, int size, int ref) {
    const long v = std::lround(static_cast<double>(t) * size / ref);
    return static_cast<int>(std::max(1L, v));
  };
  GuiFetchConfig c = *this;
  c.x_threshold = scale(x_threshold, screen_w, reference_width);
  c.width_threshold = scale(width_threshold, screen_w, reference_width);
  c.y_threshold = scale(y_threshold, screen_h, reference_height);
  c.height_threshold = scale(height_threshold, screen_h, reference_height);
  return c;
}

int pair_score(const UIComponent& a, const UIComponent& b, const GuiFetchConfig& cfg) {
  if (a.ctype != b.ctype) return 0;
  auto within = [](std::int64_t d, int t) { return (d < 0 ? -d : d) <= t; };
  int score = 0;
  if (within(std::int64_t{a.bounds.left} - b.bounds.left, cfg.x_threshold)) score += cfg.award;
  if (within(std::int64_t{a.bounds.top} - b.bounds.top, cfg.y_threshold)) score += cfg.award;
  if (within(a.bounds.width() - b.bounds.width(), cfg.width_threshold)) score += cfg.award;
  if (within(a.bounds.height() - b.bounds.height(), cfg.height_threshold)) score += cfg.award;
  return score;
}

double guifetch_similarity(const UIScreen& query, const UIScreen& candidate, const GuiFetchConfig& cfg) {
  if (query.components.empty()) throw PreconditionError("GUIFetch similarity needs a non-empty query");
  const GuiFetchConfig scaled = cfg.scaled_to(query.width, query.height);
  const bool rescale = candidate.width != query.width || candidate.height != query.height;
  auto map = [&](int v, int from, int to) {
    return static_cast<int>(std::lround(static_cast<double>(v) * to / from));
  };
  const int rows = static_cast<int>(query.components.size());
  const int cols = static_cast<int>(candidate.components.size());
  std::vector<std::int64_t> w(static_cast<std::size_t>(rows) * cols);
  for (int j = 0; j < cols; ++j) {
    UIComponent c = candidate.components[j];
    if (rescale && candidate.width > 0 && candidate.height > 0) {
      c.bounds = {map(c.bounds.left, candidate.width, query.width), map(c.bounds.top, candidate.height, query.height),
                  map(c.bounds.right, candidate.width, query.width),
                  map(c.bounds.bottom, candidate.height, query.height)};
    }
    for (int i = 0; i < rows; ++i) {
      w[static_cast<std::size_t>(i) * cols + j] = pair_score(query.components[i], c, scaled);
    }
  }
  const Matching m = max_weight_matching(w, rows, cols);
  return static_cast<double>(m.weight) / (static_cast<double>(scaled.max_pair_score()) * rows);
}

// ---- FC-AE -----------------------------------------------------------------

namespace {

std::array<int, FcAeModel::kLayers + 1> layer_sizes(const FcAeConfig& c) {
  const int d = c.input_dim();
  return {d, kFcAeHidden[0], kFcAeHidden[1], kFcAeHidden[2], kFcAeHidden[1], kFcAeHidden[0], d};
}

// ReLU follows layers 0, 1, 3 and 4.
bool has_relu(int layer) { return layer != 2 && layer != 5; }

template <typename Value>
void read_field(const json& j, const char* key, Value& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<Value>();
  } catch (const json::exception&) {
    throw FieldError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

std::string FcAeConfig::to_json() const {
  return json{{"width", width},           {"height", height},         {"lr", sgd.lr},
              {"momentum", sgd.momentum}, {"batch_size", sgd.batch_size}, {"epochs", sgd.epochs},
              {"seed", sgd.seed}}
      .dump();
}

FcAeConfig FcAeConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FieldError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FieldError("config must be a JSON object");
  FcAeConfig c;
  read_field(j, "width", c.width);
  read_field(j, "height", c.height);
  read_field(j, "lr", c.sgd.lr);
  read_field(j, "momentum", c.sgd.momentum);
  read_field(j, "batch_size", c.sgd.batch_size);
  read_field(j, "epochs", c.sgd.epochs);
  read_field(j, "seed", c.sgd.seed);
  if (c.width <= 0 || c.height <= 0) throw FieldError("FC-AE raster must be positive");
  return c;
}

FcAeModel::FcAeModel(const FcAeConfig& config) : config_(config) {
  if (config_.width <= 0 || config_.height <= 0) throw PreconditionError("FC-AE raster must be positive");
  SplitMix64 rng(config_.sgd.seed);
  const auto sizes = layer_sizes(config_);
  for (int l = 0; l < kLayers; ++l) {
    weight_[l] = Tensor<float>({sizes[l + 1], sizes[l]});
    nn::init_uniform(weight_[l], sizes[l], rng);
    bias_[l] = Tensor<float>({sizes[l + 1]});
  }
}

Tensor<float> FcAeModel::flatten(const Tensor<float>& batch) const {
  if (batch.rank() != 4 || batch.dim(1) != 2 || batch.dim(2) != config_.height || batch.dim(3) != config_.width) {
    throw ShapeError("FC-AE expects (n, 2, " + std::to_string(config_.height) + ", " + std::to_string(config_.width) +
                     ") input, got " + batch.shape_string());
  }
  return Tensor<float>({batch.dim(0), config_.input_dim()}, batch.storage());
}

std::vector<float> FcAeModel::encode(const WireframeImage& mask) const {
  Tensor<float> h = flatten(images_to_tensor(std::span<const WireframeImage>(&mask, 1)));
  for (int l = 0; l < 3; ++l) {
    h = nn::linear(h, weight_[l], bias_[l]);
    if (has_relu(l)) h = nn::relu(h);
  }
  return h.storage();
}

std::vector<float> FcAeModel::encode(const UIScreen& screen) const {
  return encode(render_text_mask(screen, config_.raster()));
}

double FcAeModel::evaluate_loss(std::span<const WireframeImage> masks) const {
  if (masks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : masks) {
    const Tensor<float> x = flatten(images_to_tensor(std::span<const WireframeImage>(&m, 1)));
    Tensor<float> h = x;
    for (int l = 0; l < kLayers; ++l) {
      h = nn::linear(h, weight_[l], bias_[l]);
      if (has_relu(l)) h = nn::relu(h);
    }
    sum += nn::mse_loss(h, x);
  }
  return sum / static_cast<double>(masks.size());
}

float FcAeModel::train_step(const Tensor<float>& batch) {
  if (grads_.empty()) {
    for (int l = 0; l < kLayers; ++l) {
      grads_.emplace_back(weight_[l].shape());
      grads_.emplace_back(bias_[l].shape());
      velocity_.emplace_back(weight_[l].shape());
      velocity_.emplace_back(bias_[l].shape());
    }
  }
  const Tensor<float> x = flatten(batch);
  std::array<Tensor<float>, kLayers> inputs;
  std::array<Tensor<float>, kLayers> pre;
  Tensor<float> h = x;
  for (int l = 0; l < kLayers; ++l) {
    inputs[l] = h;
    pre[l] = nn::linear(h, weight_[l], bias_[l]);
    h = has_relu(l) ? nn::relu(pre[l]) : pre[l];
  }
  const float loss = nn::mse_loss(h, x);
  if (!std::isfinite(loss)) return loss;
  Tensor<float> g = nn::mse_loss_backward(h, x);
  for (int l = kLayers - 1; l >= 0; --l) {
    if (has_relu(l)) g = nn::relu_backward(pre[l], g);
    auto lg = nn::linear_backward(inputs[l], weight_[l], g);
    grads_[2 * l] = std::move(lg.kernel);
    grads_[2 * l + 1] = std::move(lg.bias);
    g = std::move(lg.input);
  }
  for (int l = 0; l < kLayers; ++l) {
    nn::sgd_step<float>(weight_[l].values(), grads_[2 * l].values(), velocity_[2 * l].values(), config_.sgd.lr,
                        config_.sgd.momentum);
    nn::sgd_step<float>(bias_[l].values(), grads_[2 * l + 1].values(), velocity_[2 * l + 1].values(),
                        config_.sgd.lr, config_.sgd.momentum);
  }
  return loss;
}

Checkpoint FcAeModel::to_checkpoint() const {
  const auto sizes = layer_sizes(config_);
  json desc = {{"arch", "fcae"},
               {"input", {config_.width, config_.height, 2}},
               {"layers", sizes},
               {"config", json::parse(config_.to_json())}};
  Checkpoint ckpt{desc.dump(), {}};
  for (int l = 0; l < kLayers; ++l) {
    ckpt.tensors.push_back({"fc" + std::to_string(l) + ".weight", weight_[l]});
    ckpt.tensors.push_back({"fc" + std::to_string(l) + ".bias", bias_[l]});
  }
  return ckpt;
}

FcAeModel FcAeModel::from_checkpoint(const Checkpoint& ckpt) {
  json desc;
  try {
    desc = json::parse(ckpt.descriptor);
  } catch (const json::parse_error&) {
    throw FormatError("checkpoint descriptor is not JSON");
  }
  if (desc.value("arch", std::string()) != "fcae") throw FormatError("checkpoint is not an FC-AE model");
  FcAeConfig config;
  try {
    config = FcAeConfig::from_json(desc.at("config").dump());
  } catch (const json::exception&) {
    throw FormatError("checkpoint descriptor is missing fields");
  }
  FcAeModel model(config);
  for (int l = 0; l < kLayers; ++l) {
    const auto& w = ckpt.get("fc" + std::to_string(l) + ".weight");
    const auto& b = ckpt.get("fc" + std::to_string(l) + ".bias");
    if (!w.same_shape(model.weight_[l]) || !b.same_shape(model.bias_[l])) {
      throw FormatError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
    }
    model.weight_[l] = w;
    model.bias_[l] = b;
  }
  return model;
}

void FcAeModel::save(const std::string& path) const { write_checkpoint(path, to_checkpoint()); }

FcAeModel FcAeModel::load(const std::string& path) { return from_checkpoint(read_checkpoint(path)); }

Digest FcAeModel::fingerprint() const { return sha256(encode_checkpoint(to_checkpoint())); }

FcAeTrainResult train_fcae(const FcAeConfig& config, std::span<const WireframeImage> masks,
                           const TrainOptions& options) {
  FcAeModel model(config);
  auto loop = detail::run_sgd(model, masks.size(), config.sgd, options,
                              [&](std::span<const std::size_t> idx) { return images_to_tensor(masks, idx); });
  FcAeTrainResult result{std::move(model), std::move(loop.history), false, loop.steps};
  result.flagged = loss_history_flagged(result.loss_history);
  return result;
}

std::vector<float> fcae_encode(const FcAeModel& model, const UIScreen& screen) { return model.encode(screen); }

}  // namespace wae
