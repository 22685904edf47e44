#include <gtest/gtest.h>
#include <png.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/errors.hpp"
#include "wae/wirifier.hpp"

namespace wae {
namespace {

constexpr RepresentationMode kModes[] = {RepresentationMode::kGrey, RepresentationMode::kColor,
                                         RepresentationMode::kTexture};

// Per-pixel painter's algorithm: the smallest covering component wins, later
// document order breaks area ties. Coverage follows the floor/ceil raster map
// expressed as integer inequalities.
WireframeImage reference_render(const UIScreen& s, RepresentationMode mode, RasterSize size) {
  const int ch = mode_channels(mode);
  WireframeImage img = blank_image(size.width, size.height, ch);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      int best = -1;
      for (int i = 0; i < static_cast<int>(s.components.size()); ++i) {
        const Bounds& b = s.components[i].bounds;
        const bool cx = std::int64_t{b.left} * size.width < std::int64_t{x + 1} * s.width &&
                        std::int64_t{x} * s.width < std::int64_t{b.right} * size.width;
        const bool cy = std::int64_t{b.top} * size.height < std::int64_t{y + 1} * s.height &&
                        std::int64_t{y} * s.height < std::int64_t{b.bottom} * size.height;
        if (!cx || !cy) continue;
        if (best < 0 || b.area() <= s.components[best].bounds.area()) best = i;
      }
      if (best < 0) continue;
      const Bounds r = raster_rect(s.components[best].bounds, s.width, s.height, size);
      const FillSpec f = palette_lookup(mode, s.components[best].ctype);
      float scale = 1.0f;
      if (f.pattern) {
        const int bit = ((y - r.top) % 4) * 4 + (x - r.left) % 4;
        if ((texture_tile(*f.pattern) >> bit) & 1u) scale = 0.5f;
      }
      for (int c = 0; c < ch; ++c) img.at(x, y, c) = f.color[c] * scale;
    }
  }
  return img;
}

TEST(Palette, GreyLevelsAndDistinctness) {
  std::set<float> greys;
  for (auto t : all_component_types()) {
    const float g = palette_lookup(RepresentationMode::kGrey, t).color[0];
    EXPECT_FLOAT_EQ(g, (code(t) + 1) / 17.0f);
    EXPECT_GT(g, 0.0f);
    EXPECT_LT(g, 1.0f);
    greys.insert(g);
  }
  EXPECT_EQ(greys.size(), 16u);

  int pairs = 0;
  for (int i = 0; i < kComponentTypeCount; ++i) {
    for (int j = i + 1; j < kComponentTypeCount; ++j) {
      ++pairs;
      const auto a = palette_lookup(RepresentationMode::kColor, component_from_code(i));
      const auto b = palette_lookup(RepresentationMode::kColor, component_from_code(j));
      EXPECT_NE(a.color, b.color) << i << " " << j;
      const auto ta = palette_lookup(RepresentationMode::kTexture, component_from_code(i));
      const auto tb = palette_lookup(RepresentationMode::kTexture, component_from_code(j));
      EXPECT_NE(texture_tile(*ta.pattern), texture_tile(*tb.pattern));
    }
  }
  EXPECT_EQ(pairs, 120);
  for (int p = 0; p < kComponentTypeCount; ++p) EXPECT_EQ(std::popcount(texture_tile(p)), 8) << p;
}

TEST(Palette, ColorValuesInUnitCubeWithFullSaturation) {
  for (auto t : all_component_types()) {
    const auto c = palette_lookup(RepresentationMode::kColor, t).color;
    EXPECT_FLOAT_EQ(*std::max_element(c.begin(), c.end()), 1.0f);
    EXPECT_FLOAT_EQ(*std::min_element(c.begin(), c.end()), 0.0f);
    EXPECT_FALSE(palette_lookup(RepresentationMode::kColor, t).pattern);
  }
}

TEST(Modes, NamesRoundTrip) {
  for (auto m : kModes) EXPECT_EQ(mode_from_name(mode_name(m)), m);
  EXPECT_EQ(mode_from_name("GREY"), RepresentationMode::kGrey);
  EXPECT_EQ(mode_from_name("gray"), RepresentationMode::kGrey);
  EXPECT_FALSE(mode_from_name("sepia"));
}

TEST(RasterRect, FloorCeilKeepsSubPixelComponentsVisible) {
  EXPECT_EQ(raster_rect({0, 0, 1080, 1920}, 1080, 1920, {48, 64}), (Bounds{0, 0, 48, 64}));
  const Bounds tiny = raster_rect({500, 900, 501, 901}, 1080, 1920, {48, 64});
  EXPECT_EQ(tiny.width(), 1);
  EXPECT_EQ(tiny.height(), 1);
  EXPECT_EQ(raster_rect({10, 10, 20, 20}, 100, 100, {10, 10}), (Bounds{1, 1, 2, 2}));
  EXPECT_EQ(raster_rect({11, 11, 21, 21}, 100, 100, {10, 10}), (Bounds{1, 1, 3, 3}));
}

TEST(Render, EmptyScreenIsWhite) {
  UIScreen s{"e", 1080, 1920, {}, {}, {}};
  for (auto m : kModes) {
    auto img = render(s, m, {48, 64});
    EXPECT_EQ(img.channels, mode_channels(m));
    for (float v : img.values) ASSERT_EQ(v, 1.0f);
  }
  EXPECT_THROW(render(s, RepresentationMode::kColor, {0, 5}), PreconditionError);
}

TEST(Render, FullScreenImageViewAndOverpaint) {
  UIScreen s{"f", 1080, 1920, {{ComponentType::kImageView, {0, 0, 1080, 1920}}}, {}, {}};
  auto img = render(s, RepresentationMode::kColor, {48, 64});
  const auto c = palette_lookup(RepresentationMode::kColor, ComponentType::kImageView).color;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 48; ++x)
      for (int k = 0; k < 3; ++k) ASSERT_EQ(img.at(x, y, k), c[k]);

  // Larger components come first in the document but are painted first anyway.
  s.components.insert(s.components.begin(), {ComponentType::kTextView, {0, 0, 540, 960}});
  img = render(s, RepresentationMode::kColor, {48, 64});
  const auto t = palette_lookup(RepresentationMode::kColor, ComponentType::kTextView).color;
  EXPECT_EQ(img.at(3, 3, 0), t[0]);
  EXPECT_EQ(img.at(3, 3, 1), t[1]);
  EXPECT_EQ(img.at(40, 60, 0), c[0]);
}

TEST(Render, MatchesReferenceRenderer) {
  SplitMix64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const int w = rng.range(40, 1200), h = rng.range(40, 2000);
    UIScreen s = testing::random_screen(rng, rng.range(0, 14), w, h);
    const RasterSize size{rng.range(1, 60), rng.range(1, 70)};
    for (auto m : kModes) ASSERT_EQ(render(s, m, size), reference_render(s, m, size)) << i;
  }
  for (const auto& s : generate_corpus(8, 40)) {
    ASSERT_EQ(render(s, RepresentationMode::kColor, {48, 64}), reference_render(s, RepresentationMode::kColor, {48, 64}));
  }
}

TEST(Render, EveryPixelIsWhiteOrAPaletteValue) {
  for (const auto& s : generate_corpus(4, 30)) {
    for (auto m : {RepresentationMode::kGrey, RepresentationMode::kColor}) {
      std::set<std::vector<float>> allowed{std::vector<float>(mode_channels(m), 1.0f)};
      for (auto t : all_component_types()) {
        auto c = palette_lookup(m, t).color;
        allowed.insert(std::vector<float>(c.begin(), c.begin() + mode_channels(m)));
      }
      auto img = render(s, m, {48, 64});
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          std::vector<float> px;
          for (int c = 0; c < img.channels; ++c) px.push_back(img.at(x, y, c));
          ASSERT_TRUE(allowed.count(px));
        }
      }
    }
  }
}

TEST(Render, TwoXDownscaleMatchesWithinOnePixelOfEdges) {
  for (const auto& s : generate_corpus(6, 40)) {
    auto direct = render(s, RepresentationMode::kColor, {48, 64});
    auto big = render(s, RepresentationMode::kColor, {96, 128});
    const double sx = 48.0 / s.width, sy = 64.0 / s.height;
    // Is some component edge within one small pixel of (x, y)?
    auto near_edge = [&](int x, int y) {
      for (const auto& c : s.components) {
        const double l = c.bounds.left * sx, r = c.bounds.right * sx;
        const double t = c.bounds.top * sy, b = c.bounds.bottom * sy;
        const bool in_y = t < y + 2 && b > y - 1, in_x = l < x + 2 && r > x - 1;
        if (in_y && (std::abs(l - x - 0.5) <= 1.5 || std::abs(r - x - 0.5) <= 1.5)) return true;
        if (in_x && (std::abs(t - y - 0.5) <= 1.5 || std::abs(b - y - 0.5) <= 1.5)) return true;
      }
      return false;
    };
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 48; ++x) {
        bool same = true;
        for (int c = 0; c < 3; ++c) same &= direct.at(x, y, c) == big.at(2 * x, 2 * y, c);
        if (!same) {
          ASSERT_TRUE(near_edge(x, y)) << s.id << " " << x << "," << y;
        }
      }
    }
  }
}

TEST(Render, TextureHalvesTileBits) {
  UIScreen s{"t", 8, 8, {{ComponentType::kButton, {0, 0, 8, 8}}}, {}, {}};
  auto img = render(s, RepresentationMode::kTexture, {8, 8});
  const auto f = palette_lookup(RepresentationMode::kTexture, ComponentType::kButton);
  const auto tile = texture_tile(*f.pattern);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const bool half = (tile >> ((y % 4) * 4 + x % 4)) & 1u;
      for (int c = 0; c < 3; ++c) ASSERT_EQ(img.at(x, y, c), f.color[c] * (half ? 0.5f : 1.0f));
    }
}

TEST(TextMask, ChannelsSplitTextAndOther) {
  UIScreen s{"m", 100, 100,
             {{ComponentType::kImageView, {0, 0, 100, 100}}, {ComponentType::kEditText, {0, 0, 50, 50}}}, {}, {}};
  auto m = render_text_mask(s, {10, 10});
  EXPECT_EQ(m.channels, 2);
  EXPECT_EQ(m.at(1, 1, 0), 1.0f);
  EXPECT_EQ(m.at(1, 1, 1), 0.0f);
  EXPECT_EQ(m.at(8, 8, 0), 0.0f);
  EXPECT_EQ(m.at(8, 8, 1), 1.0f);
  UIScreen empty{"e", 100, 100, {}, {}, {}};
  for (float v : render_text_mask(empty, {10, 10}).values) ASSERT_EQ(v, 0.0f);
}

WireframeImage decode_png(const std::vector<std::uint8_t>& bytes, int channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) throw std::runtime_error("bad png");
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr);
  WireframeImage out{static_cast<int>(image.width), static_cast<int>(image.height), channels, {}};
  for (auto b : buf) out.values.push_back(b / 255.0f);
  return out;
}

TEST(Export, PngRoundTripsAtEightBits) {
  auto s = generate_screen(3, TemplateKind::kGrid);
  for (auto m : {RepresentationMode::kGrey, RepresentationMode::kColor}) {
    auto img = render(s, m, {48, 64});
    auto back = decode_png(encode_png(img), img.channels);
    ASSERT_EQ(back.width, 48);
    ASSERT_EQ(back.height, 64);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
      ASSERT_NEAR(back.values[i], img.values[i], 0.5 / 255 + 1e-6);
    }
  }
  WireframeImage two = blank_image(4, 4, 2);
  EXPECT_THROW(encode_png(two), PreconditionError);
}

TEST(Export, TensorFileRoundTripAndCorruption) {
  auto img = render(generate_screen(3, TemplateKind::kList), RepresentationMode::kTexture, {48, 64});
  auto bytes = encode_tensor_file(img);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "WFIMG1");
  EXPECT_EQ(bytes.size(), 6 + 12 + img.values.size() * 4);
  EXPECT_EQ(decode_tensor_file(bytes), img);
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_tensor_file(cut), FormatError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_tensor_file(bad), FormatError);

  testing::TempDir dir("wf");
  write_tensor_file(dir.file("a.wfimg"), img);
  EXPECT_EQ(read_tensor_file(dir.file("a.wfimg")), img);
}

}  // namespace
}  // namespace wae
