#include "wae/wirifier.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {

// Half-density 4x4 tiles, one per component type. Row r of the tile is the
// nibble at bits 4r..4r+3.
constexpr std::array<std::uint16_t, kComponentTypeCount> kTiles = {
    0x0F0F,  // horizontal stripes, period 2
    0x00FF,  // horizontal stripes, period 4
    0x5555,  // vertical stripes, period 2
    0x3333,  // vertical stripes, period 4
    0xA5A5,  // checkerboard 1x1
    0xCC33,  // checkerboard 2x2
    0x9C63,  // diagonal
    0x6C93,  // anti-diagonal
    0xAA55,  // offset columns
    0xC3C3,  // alternating pairs
    0x9966,  // woven
    0xF00F,  // wide bands
    0x9999,  // edge columns
    0x9696,  // zigzag
    0x1717,  // comb
    0x8E8E,  // mirrored comb
};

std::array<float, 3> hue_color(int i) {
  // HSV(i/16, 1, 1) -> RGB
  const double h6 = 6.0 * i / kComponentTypeCount;
  const int sector = static_cast<int>(std::floor(h6));
  const float f = static_cast<float>(h6 - sector);
  const float q = 1.0f - f;
  switch (sector % 6) {
    case 0: return {1.0f, f, 0.0f};
    case 1: return {q, 1.0f, 0.0f};
    case 2: return {0.0f, 1.0f, f};
    case 3: return {0.0f, q, 1.0f};
    case 4: return {f, 0.0f, 1.0f};
    default: return {1.0f, 0.0f, q};
  }
}

std::vector<std::size_t> paint_order(const UIScreen& screen) {
  std::vector<std::size_t> order(screen.components.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return screen.components[a].bounds.area() > screen.components[b].bounds.area();
  });
  return order;
}

void check_size(RasterSize size) {
  if (size.width <= 0 || size.height <= 0) throw PreconditionError("raster size must be positive");
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::string_view mode_name(RepresentationMode mode) {
  switch (mode) {
    case RepresentationMode::kGrey: return "grey";
    case RepresentationMode::kColor: return "color";
    case RepresentationMode::kTexture: return "texture";
  }
  return "color";
}

std::optional<RepresentationMode> mode_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "grey" || lower == "gray") return RepresentationMode::kGrey;
  if (lower == "color" || lower == "colour") return RepresentationMode::kColor;
  if (lower == "texture") return RepresentationMode::kTexture;
  return std::nullopt;
}

WireframeImage blank_image(int width, int height, int channels, float fill) {
  WireframeImage img{width, height, channels, {}};
  img.values.assign(static_cast<std::size_t>(width) * height * channels, fill);
  return img;
}

FillSpec palette_lookup(RepresentationMode mode, ComponentType ctype) {
  const int i = code(ctype);
  FillSpec f;
  switch (mode) {
    case RepresentationMode::kGrey: {
      const float g = static_cast<float>(i + 1) / 17.0f;
      f.color = {g, g, g};
      break;
    }
    case RepresentationMode::kColor:
      f.color = hue_color(i);
      break;
    case RepresentationMode::kTexture:
      f.color = hue_color(i);
      f.pattern = i;
      break;
  }
  return f;
}

std::uint16_t texture_tile(int pattern) { return kTiles.at(pattern); }

Bounds raster_rect(const Bounds& b, int screen_w, int screen_h, RasterSize size) {
  auto floor_div = [](std::int64_t a, std::int64_t d) { return a >= 0 ? a / d : -((-a + d - 1) / d); };
  auto ceil_div = [&](std::int64_t a, std::int64_t d) { return -floor_div(-a, d); };
  auto clamp = [](std::int64_t v, int hi) { return static_cast<int>(std::clamp<std::int64_t>(v, 0, hi)); };
  return Bounds{clamp(floor_div(std::int64_t{b.left} * size.width, screen_w), size.width),
                clamp(floor_div(std::int64_t{b.top} * size.height, screen_h), size.height),
                clamp(ceil_div(std::int64_t{b.right} * size.width, screen_w), size.width),
                clamp(ceil_div(std::int64_t{b.bottom} * size.height, screen_h), size.height)};
}

WireframeImage render(const UIScreen& screen, RepresentationMode mode, RasterSize size) {
  check_size(size);
  const int channels = mode_channels(mode);
  WireframeImage img = blank_image(size.width, size.height, channels);
  if (screen.width <= 0 || screen.height <= 0) return img;

  for (std::size_t idx : paint_order(screen)) {
    const auto& comp = screen.components[idx];
    const Bounds r = raster_rect(comp.bounds, screen.width, screen.height, size);
    const FillSpec fill = palette_lookup(mode, comp.ctype);
    const std::uint16_t tile = fill.pattern ? texture_tile(*fill.pattern) : 0;
    for (int y = r.top; y < r.bottom; ++y) {
      for (int x = r.left; x < r.right; ++x) {
        float scale = 1.0f;
        if (tile) {
          const int bit = ((y - r.top) % 4) * 4 + (x - r.left) % 4;
          if ((tile >> bit) & 1u) scale = 0.5f;
        }
        for (int c = 0; c < channels; ++c) img.at(x, y, c) = fill.color[c] * scale;
      }
    }
  }
  return img;
}

WireframeImage render_text_mask(const UIScreen& screen, RasterSize size) {
  check_size(size);
  WireframeImage img = blank_image(size.width, size.height, 2, 0.0f);
  if (screen.width <= 0 || screen.height <= 0) return img;
  for (std::size_t idx : paint_order(screen)) {
    const auto& comp = screen.components[idx];
    const Bounds r = raster_rect(comp.bounds, screen.width, screen.height, size);
    const bool text = is_text_component(comp.ctype);
    for (int y = r.top; y < r.bottom; ++y) {
      for (int x = r.left; x < r.right; ++x) {
        img.at(x, y, 0) = text ? 1.0f : 0.0f;
        img.at(x, y, 1) = text ? 0.0f : 1.0f;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const WireframeImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw PreconditionError("PNG export supports 1 or 3 channels");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> rows(image.values.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const float v = std::clamp(image.values[i], 0.0f, 1.0f);
    rows[i] = static_cast<std::uint8_t>(std::lround(255.0f * v));
  }
  std::vector<png_bytep> row_ptrs(image.height);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  for (int y = 0; y < image.height; ++y) row_ptrs[y] = rows.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::string& path, const WireframeImage& image) {
  detail::write_file(path, encode_png(image));
}

std::vector<std::uint8_t> encode_tensor_file(const WireframeImage& image) {
  detail::ByteWriter w;
  w.magic("WFIMG1");
  w.u32(static_cast<std::uint32_t>(image.width));
  w.u32(static_cast<std::uint32_t>(image.height));
  w.u32(static_cast<std::uint32_t>(image.channels));
  w.f32s(image.values);
  return std::move(w.bytes());
}

WireframeImage decode_tensor_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "wireframe tensor");
  r.expect_magic("WFIMG1");
  WireframeImage img;
  img.width = static_cast<int>(r.u32());
  img.height = static_cast<int>(r.u32());
  img.channels = static_cast<int>(r.u32());
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (r.remaining() != n * 4) throw FormatError("wireframe tensor: payload size mismatch");
  img.values.resize(n);
  r.f32s(img.values);
  return img;
}

void write_tensor_file(const std::string& path, const WireframeImage& image) {
  detail::write_file(path, encode_tensor_file(image));
}

WireframeImage read_tensor_file(const std::string& path) {
  return decode_tensor_file(detail::read_file(path));
}

}  // namespace wae
