#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"
#include "wae/autoencoder.hpp"
#include "wae/checkpoint.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {

std::vector<WireframeImage> small_corpus(std::size_t n, const WaeConfig& cfg) {
  std::vector<WireframeImage> out;
  for (const auto& s : generate_corpus(13, n)) out.push_back(render(s, cfg.mode, cfg.raster()));
  return out;
}

TEST(WaeConfig, JsonRoundTripAndValidation) {
  WaeConfig c;
  c.width = 32;
  c.mode = RepresentationMode::kGrey;
  c.sgd.lr = 0.05f;
  c.sgd.seed = 9;
  EXPECT_EQ(WaeConfig::from_json(c.to_json()), c);
  EXPECT_EQ(WaeConfig::from_json("{}"), WaeConfig{});
  EXPECT_EQ(WaeConfig{}.latent_dim(), 64 * 3 * 4);
  EXPECT_THROW(WaeConfig::from_json(R"({"mode":"sepia"})"), FieldError);
  EXPECT_THROW(WaeConfig::from_json(R"({"width":"wide"})"), FieldError);
  EXPECT_THROW(WaeConfig::from_json("[1"), FieldError);
  WaeConfig bad;
  bad.width = 40;
  EXPECT_THROW(bad.validate(), PreconditionError);
  EXPECT_THROW(WaeModel{bad}, PreconditionError);
}

TEST(WaeModel, EncodeDecodeShapes) {
  WaeConfig cfg;
  WaeModel m(cfg);
  auto img = render(generate_screen(1, TemplateKind::kForm), cfg.mode, cfg.raster());
  auto z = m.encode(img);
  EXPECT_EQ(z.size(), 768u);
  EXPECT_EQ(z, m.encode(img));
  EXPECT_EQ(m.decode(z).shape(), (std::vector<int>{1, 3, 64, 48}));
  EXPECT_EQ(m.reconstruct(img).shape(), (std::vector<int>{1, 3, 64, 48}));
  EXPECT_THROW(m.encode(blank_image(48, 64, 1)), ShapeError);
  EXPECT_THROW(m.encode(blank_image(32, 64, 3)), ShapeError);
  EXPECT_THROW(m.decode(std::vector<float>(5)), ShapeError);
  EXPECT_EQ(m.encode(generate_screen(1, TemplateKind::kForm)), z);
}

TEST(WaeModel, SaliencyIsScaledToUnitRange) {
  WaeConfig cfg;
  WaeModel m(cfg);
  auto img = render(generate_screen(2, TemplateKind::kList), cfg.mode, cfg.raster());
  auto s = m.saliency(img);
  ASSERT_EQ(s.size(), 48u * 64u);
  EXPECT_FLOAT_EQ(*std::max_element(s.begin(), s.end()), 1.0f);
  EXPECT_GE(*std::min_element(s.begin(), s.end()), 0.0f);
  EXPECT_EQ(s, m.saliency(img));
}

TEST(WaeModel, TrainStepReducesLossOnFixedBatch) {
  WaeConfig cfg;
  WaeModel m(cfg);
  auto imgs = small_corpus(4, cfg);
  auto batch = images_to_tensor(imgs);
  const float first = m.train_step(batch);
  float last = first;
  for (int i = 0; i < 30; ++i) last = m.train_step(batch);
  EXPECT_LT(last, 0.5f * first);
}

TEST(WaeModel, OverfitsOneWireframeDeterministically) {
  WaeConfig cfg;
  cfg.sgd.batch_size = 1;
  cfg.sgd.epochs = 200;
  auto imgs = small_corpus(1, cfg);
  auto a = train_wae(cfg, imgs);
  auto b = train_wae(cfg, imgs);
  EXPECT_EQ(a.steps, 200);
  EXPECT_LT(a.loss_history.back(), 0.1f * a.loss_history.front());
  EXPECT_EQ(encode_checkpoint(a.model.to_checkpoint()), encode_checkpoint(b.model.to_checkpoint()));
}

TEST(WaeModel, CheckpointRoundTrip) {
  WaeConfig cfg;
  cfg.mode = RepresentationMode::kTexture;
  cfg.sgd.epochs = 1;
  cfg.sgd.batch_size = 4;
  auto imgs = small_corpus(8, cfg);
  auto trained = train_wae(cfg, imgs).model;
  testing::TempDir dir("ae");
  trained.save(dir.file("m.waenet"));
  auto loaded = WaeModel::load(dir.file("m.waenet"));
  EXPECT_EQ(loaded.config(), trained.config());
  EXPECT_EQ(loaded.encode(imgs[3]), trained.encode(imgs[3]));
  EXPECT_EQ(loaded.fingerprint(), trained.fingerprint());
  EXPECT_NE(WaeModel(cfg).fingerprint(), trained.fingerprint());

  auto ckpt = trained.to_checkpoint();
  auto wrong = ckpt;
  wrong.descriptor = R"({"arch":"fcae"})";
  EXPECT_THROW(WaeModel::from_checkpoint(wrong), FormatError);
  auto missing = ckpt;
  missing.tensors.pop_back();
  EXPECT_THROW(WaeModel::from_checkpoint(missing), FormatError);
}

TEST(TrainWae, ErrorsAndOptions) {
  WaeConfig cfg;
  cfg.sgd.batch_size = 4;
  cfg.sgd.epochs = 3;
  auto imgs = small_corpus(6, cfg);
  EXPECT_THROW(train_wae(cfg, {}), PreconditionError);
  cfg.sgd.batch_size = 7;
  EXPECT_THROW(train_wae(cfg, imgs), PreconditionError);
  cfg.sgd.batch_size = 4;

  testing::TempDir dir("train");
  TrainOptions opt;
  opt.checkpoint_path = dir.file("ckpt.waenet");
  std::vector<int> epochs;
  opt.on_epoch = [&](int e, float loss) {
    epochs.push_back(e);
    EXPECT_TRUE(std::isfinite(loss));
  };
  auto r = train_wae(cfg, imgs, opt);
  EXPECT_EQ(epochs, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(r.loss_history.size(), 3u);
  EXPECT_EQ(r.steps, 6);
  EXPECT_EQ(WaeModel::load(opt.checkpoint_path).fingerprint(), r.model.fingerprint());

  TrainOptions capped;
  capped.max_steps = 3;
  EXPECT_EQ(train_wae(cfg, imgs, capped).steps, 3);

  cfg.sgd.lr = 1e12f;
  try {
    train_wae(cfg, imgs);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos);
  }
}

TEST(LossHistory, Flagging) {
  EXPECT_FALSE(loss_history_flagged(std::vector<float>{}));
  EXPECT_FALSE(loss_history_flagged(std::vector<float>{1.0f, 0.8f, 0.7f, 0.75f, 0.6f}));
  EXPECT_TRUE(loss_history_flagged(std::vector<float>{1.0f, 2.0f}));
  // A single spike is damped by the five-epoch average.
  EXPECT_FALSE(loss_history_flagged(std::vector<float>{1, 1, 1, 1, 1, 1.4f}));
  EXPECT_TRUE(loss_history_flagged(std::vector<float>{1, 1, 1, 1, 1, 1.6f}));
}

TEST(Batching, ImagesToTensorAndBack) {
  auto a = render(generate_screen(4, TemplateKind::kGrid), RepresentationMode::kColor, {16, 32});
  auto b = render(generate_screen(5, TemplateKind::kGrid), RepresentationMode::kColor, {16, 32});
  std::vector<WireframeImage> imgs{a, b};
  auto t = images_to_tensor(imgs);
  EXPECT_EQ(t.shape(), (std::vector<int>{2, 3, 32, 16}));
  EXPECT_EQ(t.at(1, 2, 5, 7), b.at(7, 5, 2));
  EXPECT_EQ(tensor_to_image(t, 1), b);
  const std::vector<std::size_t> order{1, 0};
  EXPECT_EQ(tensor_to_image(images_to_tensor(imgs, order), 0), b);
  imgs.push_back(blank_image(8, 8, 3));
  EXPECT_THROW(images_to_tensor(imgs), ShapeError);
}

TEST(CheckpointFormat, RoundTripAndCorruption) {
  Checkpoint c{R"({"arch":"x"})", {{"a", nn::Tensor<float>({2, 3}, 1.5f)}, {"b", nn::Tensor<float>({4}, -2.0f)}}};
  auto bytes = encode_checkpoint(c);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "WAENET1");
  EXPECT_EQ(decode_checkpoint(bytes), c);
  EXPECT_EQ(decode_checkpoint(bytes).get("b").size(), 4u);
  EXPECT_THROW(decode_checkpoint(bytes).get("zz"), FormatError);
  for (std::size_t i : {std::size_t{0}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[i] ^= 0x40;
    EXPECT_THROW(decode_checkpoint(bad), FormatError) << i;
  }
  auto cut = bytes;
  cut.resize(bytes.size() - 5);
  EXPECT_THROW(decode_checkpoint(cut), FormatError);
  EXPECT_THROW(read_checkpoint("/nonexistent/x.waenet"), Error);
}

TEST(Sha256, KnownVectorsAndHex) {
  const std::string abc = "abc";
  auto d = sha256(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()));
  EXPECT_EQ(to_hex(d), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(to_hex(sha256({})), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(digest_from_hex(to_hex(d)), d);
  EXPECT_THROW(digest_from_hex("abc"), FieldError);
}

}  // namespace
}  // namespace wae
