#include "wae/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sgd_loop.hpp"
#include "wae/errors.hpp"
#include "wae/rng.hpp"

namespace wae {

using nn::Mode;
using nn::Tensor;
using nlohmann::json;

namespace {

json sgd_to_json(const SgdSettings& s) {
  return {{"lr", s.lr}, {"momentum", s.momentum}, {"batch_size", s.batch_size}, {"epochs", s.epochs},
          {"seed", s.seed}};
}

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

void WaeConfig::validate() const {
  if (width <= 0 || height <= 0 || width % 16 != 0 || height % 16 != 0) {
    throw PreconditionError("raster " + std::to_string(width) + "x" + std::to_string(height) +
                            " must be positive multiples of 16");
  }
  if (!(sgd.lr > 0.0f) || sgd.momentum < 0.0f || sgd.momentum >= 1.0f) {
    throw PreconditionError("lr must be > 0 and momentum in [0, 1)");
  }
}

std::string WaeConfig::to_json() const {
  json j = {{"width", width}, {"height", height}, {"mode", std::string(mode_name(mode))}};
  j.update(sgd_to_json(sgd));
  return j.dump();
}

WaeConfig WaeConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FieldError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FieldError("config must be a JSON object");
  WaeConfig c;
  read_field(j, "width", c.width);
  read_field(j, "height", c.height);
  if (j.contains("mode")) {
    std::string m;
    read_field(j, "mode", m);
    auto parsed = mode_from_name(m);
    if (!parsed) throw FieldError("unknown representation mode \"" + m + "\"");
    c.mode = *parsed;
  }
  read_field(j, "lr", c.sgd.lr);
  read_field(j, "momentum", c.sgd.momentum);
  read_field(j, "batch_size", c.sgd.batch_size);
  read_field(j, "epochs", c.sgd.epochs);
  read_field(j, "seed", c.sgd.seed);
  return c;
}

struct WaeModel::Cache {
  std::array<Tensor<float>, 4> conv_in;
  std::array<Tensor<float>, 4> conv_out;
  std::array<Tensor<float>, 4> relu_out;
  std::array<std::vector<std::uint32_t>, 4> argmax;
  std::array<nn::BatchNormCache<float>, 4> bn;
  std::array<Tensor<float>, 4> up_out;
  std::array<Tensor<float>, 4> dec_out;
};

WaeModel::WaeModel(const WaeConfig& config) : config_(config) {
  config_.validate();
  SplitMix64 rng(config_.sgd.seed);
  int in = config_.channels();
  for (int i = 0; i < 4; ++i) {
    const int out = kEncoderChannels[i];
    enc_kernel_[i] = Tensor<float>({out, in, kKernelSize, kKernelSize});
    nn::init_uniform(enc_kernel_[i], in * kKernelSize * kKernelSize, rng);
    enc_bias_[i] = Tensor<float>({out});
    bn_[i] = nn::BatchNorm<float>(out);
    in = out;
  }
  for (int j = 0; j < 4; ++j) {
    const int out = j < 3 ? kDecoderHiddenChannels[j] : config_.channels();
    dec_kernel_[j] = Tensor<float>({in, out, kKernelSize, kKernelSize});
    nn::init_uniform(dec_kernel_[j], in * kKernelSize * kKernelSize, rng);
    dec_bias_[j] = Tensor<float>({out});
    in = out;
  }
}

std::vector<Tensor<float>*> WaeModel::parameters() {
  std::vector<Tensor<float>*> p;
  for (int i = 0; i < 4; ++i) {
    p.push_back(&enc_kernel_[i]);
    p.push_back(&enc_bias_[i]);
    p.push_back(&bn_[i].gamma);
    p.push_back(&bn_[i].beta);
  }
  for (int j = 0; j < 4; ++j) {
    p.push_back(&dec_kernel_[j]);
    p.push_back(&dec_bias_[j]);
  }
  return p;
}

Tensor<float> WaeModel::to_input(const WireframeImage& image) const {
  if (image.width != config_.width || image.height != config_.height || image.channels != config_.channels()) {
    throw ShapeError("image is " + std::to_string(image.width) + "x" + std::to_string(image.height) + "x" +
                     std::to_string(image.channels) + ", model expects " + std::to_string(config_.width) + "x" +
                     std::to_string(config_.height) + "x" + std::to_string(config_.channels()));
  }
  return images_to_tensor(std::span<const WireframeImage>(&image, 1));
}

Tensor<float> WaeModel::encode_forward(const Tensor<float>& x, Mode mode, Cache* cache, BatchNormStats* stats) const {
  Tensor<float> h = x;
  for (int i = 0; i < 4; ++i) {
    Tensor<float> conv = nn::conv2d(h, enc_kernel_[i], enc_bias_[i]);
    Tensor<float> act = nn::relu(conv);
    auto pooled = nn::maxpool2x2(act);
    nn::BatchNormCache<float>* bn_cache = cache ? &cache->bn[i] : nullptr;
    Tensor<float> next;
    if (mode == Mode::kTrain) {
      next = nn::batchnorm(pooled.output, (*stats)[i], Mode::kTrain, bn_cache);
    } else {
      next = nn::batchnorm_eval(pooled.output, bn_[i], bn_cache);
    }
    if (cache) {
      cache->conv_in[i] = std::move(h);
      cache->conv_out[i] = std::move(conv);
      cache->relu_out[i] = std::move(act);
      cache->argmax[i] = std::move(pooled.argmax);
    }
    h = std::move(next);
  }
  return h;
}

Tensor<float> WaeModel::decode_forward(const Tensor<float>& z, Cache* cache) const {
  Tensor<float> h = z;
  for (int j = 0; j < 4; ++j) {
    Tensor<float> up = nn::upsample_nearest2x(h);
    Tensor<float> out = nn::transposed_conv2d(up, dec_kernel_[j], dec_bias_[j]);
    Tensor<float> next = j < 3 ? nn::relu(out) : out;
    if (cache) {
      cache->up_out[j] = std::move(up);
      cache->dec_out[j] = std::move(out);
    }
    h = std::move(next);
  }
  return h;
}

Tensor<float> WaeModel::backward(const Cache& cache, const Tensor<float>& grad_out,
                                 std::vector<Tensor<float>>* param_grads) const {
  auto accumulate = [&](std::size_t slot, const Tensor<float>& g) {
    if (!param_grads) return;
    auto& dst = (*param_grads)[slot];
    for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g[k];
  };
  Tensor<float> g = grad_out;
  for (int j = 3; j >= 0; --j) {
    if (j < 3) g = nn::relu_backward(cache.dec_out[j], g);
    auto tg = nn::transposed_conv2d_backward(cache.up_out[j], dec_kernel_[j], g);
    accumulate(16 + 2 * j, tg.kernel);
    accumulate(16 + 2 * j + 1, tg.bias);
    g = nn::upsample_nearest2x_backward(tg.input);
  }
  for (int i = 3; i >= 0; --i) {
    auto bg = nn::batchnorm_backward(g, bn_[i], cache.bn[i]);
    accumulate(4 * i + 2, bg.gamma);
    accumulate(4 * i + 3, bg.beta);
    g = nn::maxpool2x2_backward(bg.input, cache.argmax[i], cache.relu_out[i].shape());
    g = nn::relu_backward(cache.conv_out[i], g);
    auto cg = nn::conv2d_backward(cache.conv_in[i], enc_kernel_[i], g);
    accumulate(4 * i, cg.kernel);
    accumulate(4 * i + 1, cg.bias);
    g = std::move(cg.input);
  }
  return g;
}

std::vector<float> WaeModel::encode(const WireframeImage& image) const {
  const Tensor<float> z = encode_forward(to_input(image), Mode::kEval, nullptr, nullptr);
  return z.storage();
}

std::vector<float> WaeModel::encode(const UIScreen& screen) const {
  return encode(render(screen, config_.mode, config_.raster()));
}

Tensor<float> WaeModel::decode(std::span<const float> latent) const {
  if (latent.size() != static_cast<std::size_t>(latent_dim())) {
    throw ShapeError("latent has dimension " + std::to_string(latent.size()) + ", model expects " +
                     std::to_string(latent_dim()));
  }
  Tensor<float> z({1, kEncoderChannels[3], config_.height / 16, config_.width / 16},
                  std::vector<float>(latent.begin(), latent.end()));
  return decode_forward(z, nullptr);
}

Tensor<float> WaeModel::reconstruct(const WireframeImage& image) const {
  return decode_forward(encode_forward(to_input(image), Mode::kEval, nullptr, nullptr), nullptr);
}

double WaeModel::evaluate_loss(std::span<const WireframeImage> images) const {
  if (images.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& img : images) {
    const Tensor<float> x = to_input(img);
    sum += nn::mse_loss(reconstruct(img), x);
  }
  return sum / static_cast<double>(images.size());
}

std::vector<float> WaeModel::saliency(const WireframeImage& image) const {
  const Tensor<float> x = to_input(image);
  Cache cache;
  const Tensor<float> z = encode_forward(x, Mode::kEval, &cache, nullptr);
  const Tensor<float> y = decode_forward(z, &cache);
  const Tensor<float> dx = backward(cache, nn::mse_loss_backward(y, x), nullptr);
  const int c = x.dim(1);
  const std::size_t plane = static_cast<std::size_t>(config_.width) * config_.height;
  std::vector<float> heat(plane, 0.0f);
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < plane; ++p) heat[p] = std::max(heat[p], std::abs(dx[ch * plane + p]));
  }
  const auto [lo_it, hi_it] = std::minmax_element(heat.begin(), heat.end());
  const float lo = *lo_it, hi = *hi_it;
  if (hi <= 0.0f) return heat;
  if (hi - lo <= 0.0f) {
    std::fill(heat.begin(), heat.end(), 1.0f);
    return heat;
  }
  for (auto& v : heat) v = (v - lo) / (hi - lo);
  return heat;
}

float WaeModel::train_step(const Tensor<float>& batch) {
  auto params = parameters();
  if (grads_.empty()) {
    for (auto* p : params) {
      grads_.emplace_back(p->shape());
      velocity_.emplace_back(p->shape());
    }
  }
  for (auto& g : grads_) g.fill(0.0f);
  Cache cache;
  BatchNormStats stats = bn_;
  const Tensor<float> z = encode_forward(batch, Mode::kTrain, &cache, &stats);
  const Tensor<float> y = decode_forward(z, &cache);
  const float loss = nn::mse_loss(y, batch);
  if (!std::isfinite(loss)) return loss;
  backward(cache, nn::mse_loss_backward(y, batch), &grads_);
  for (int i = 0; i < 4; ++i) {
    bn_[i].running_mean = std::move(stats[i].running_mean);
    bn_[i].running_var = std::move(stats[i].running_var);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::sgd_step<float>(params[k]->values(), grads_[k].values(), velocity_[k].values(), config_.sgd.lr,
                        config_.sgd.momentum);
  }
  return loss;
}

Checkpoint WaeModel::to_checkpoint() const {
  json desc = {{"arch", "wae"},
               {"input", {config_.width, config_.height, config_.channels()}},
               {"encoder", kEncoderChannels},
               {"decoder", {kDecoderHiddenChannels[0], kDecoderHiddenChannels[1], kDecoderHiddenChannels[2],
                            config_.channels()}},
               {"mode", std::string(mode_name(config_.mode))},
               {"sgd", sgd_to_json(config_.sgd)}};
  Checkpoint ckpt{desc.dump(), {}};
  for (int i = 0; i < 4; ++i) {
    const std::string p = "enc" + std::to_string(i) + ".";
    ckpt.tensors.push_back({p + "kernel", enc_kernel_[i]});
    ckpt.tensors.push_back({p + "bias", enc_bias_[i]});
    ckpt.tensors.push_back({p + "bn.gamma", bn_[i].gamma});
    ckpt.tensors.push_back({p + "bn.beta", bn_[i].beta});
    ckpt.tensors.push_back({p + "bn.running_mean", bn_[i].running_mean});
    ckpt.tensors.push_back({p + "bn.running_var", bn_[i].running_var});
  }
  for (int j = 0; j < 4; ++j) {
    const std::string p = "dec" + std::to_string(j) + ".";
    ckpt.tensors.push_back({p + "kernel", dec_kernel_[j]});
    ckpt.tensors.push_back({p + "bias", dec_bias_[j]});
  }
  return ckpt;
}

WaeModel WaeModel::from_checkpoint(const Checkpoint& ckpt) {
  json desc;
  try {
    desc = json::parse(ckpt.descriptor);
  } catch (const json::parse_error&) {
    throw FormatError("checkpoint descriptor is not JSON");
  }
  if (desc.value("arch", std::string()) != "wae") throw FormatError("checkpoint is not a W-AE model");
  WaeConfig config;
  try {
    const auto& input = desc.at("input");
    config.width = input.at(0).get<int>();
    config.height = input.at(1).get<int>();
    auto mode = mode_from_name(desc.at("mode").get<std::string>());
    if (!mode) throw FormatError("checkpoint names an unknown mode");
    config.mode = *mode;
    if (desc.contains("sgd")) {
      const auto& sgd = desc.at("sgd");
      read_field(sgd, "lr", config.sgd.lr);
      read_field(sgd, "momentum", config.sgd.momentum);
      read_field(sgd, "batch_size", config.sgd.batch_size);
      read_field(sgd, "epochs", config.sgd.epochs);
      read_field(sgd, "seed", config.sgd.seed);
    }
  } catch (const json::exception&) {
    throw FormatError("checkpoint descriptor is missing fields");
  }
  WaeModel model(config);
  auto take = [&](const std::string& name, Tensor<float>& dst) {
    const auto& src = ckpt.get(name);
    if (!src.same_shape(dst)) {
      throw FormatError("checkpoint tensor \"" + name + "\" has shape " + src.shape_string() + ", expected " +
                        dst.shape_string());
    }
    dst = src;
  };
  for (int i = 0; i < 4; ++i) {
    const std::string p = "enc" + std::to_string(i) + ".";
    take(p + "kernel", model.enc_kernel_[i]);
    take(p + "bias", model.enc_bias_[i]);
    take(p + "bn.gamma", model.bn_[i].gamma);
    take(p + "bn.beta", model.bn_[i].beta);
    take(p + "bn.running_mean", model.bn_[i].running_mean);
    take(p + "bn.running_var", model.bn_[i].running_var);
  }
  for (int j = 0; j < 4; ++j) {
    const std::string p = "dec" + std::to_string(j) + ".";
    take(p + "kernel", model.dec_kernel_[j]);
    take(p + "bias", model.dec_bias_[j]);
  }
  return model;
}

void WaeModel::save(const std::string& path) const { write_checkpoint(path, to_checkpoint()); }

WaeModel WaeModel::load(const std::string& path) { return from_checkpoint(read_checkpoint(path)); }

Digest WaeModel::fingerprint() const { return sha256(encode_checkpoint(to_checkpoint())); }

WaeTrainResult train_wae(const WaeConfig& config, std::span<const WireframeImage> corpus,
                         const TrainOptions& options) {
  WaeModel model(config);
  for (const auto& img : corpus) {
    if (img.width != config.width || img.height != config.height || img.channels != config.channels()) {
      throw ShapeError("training image size does not match the model configuration");
    }
  }
  auto loop = detail::run_sgd(model, corpus.size(), config.sgd, options,
                              [&](std::span<const std::size_t> idx) { return images_to_tensor(corpus, idx); });
  WaeTrainResult result{std::move(model), std::move(loop.history), false, loop.steps};
  result.flagged = loss_history_flagged(result.loss_history);
  return result;
}

}  // namespace wae
