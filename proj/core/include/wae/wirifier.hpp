#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wae/ui_model.hpp"

namespace wae {

enum class RepresentationMode : std::uint8_t { kGrey, kColor, kTexture };

std::string_view mode_name(RepresentationMode mode);  // "grey" | "color" | "texture"
std::optional<RepresentationMode> mode_from_name(std::string_view name);  // case-insensitive

inline int mode_channels(RepresentationMode mode) noexcept {
  return mode == RepresentationMode::kGrey ? 1 : 3;
}

struct RasterSize {
  int width = 48;
  int height = 64;
  friend bool operator==(const RasterSize&, const RasterSize&) = default;
};

/// H x W x C raster, interleaved channels, row-major, values in [0, 1].
struct WireframeImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> values;

  float at(int x, int y, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float& at(int x, int y, int c = 0) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  friend bool operator==(const WireframeImage&, const WireframeImage&) = default;
};

WireframeImage blank_image(int width, int height, int channels, float fill = 1.0f);

struct FillSpec {
  std::array<float, 3> color{};  // Grey uses color[0] only
  std::optional<int> pattern;     // Texture mode only

  friend bool operator==(const FillSpec&, const FillSpec&) = default;
};

/// Grey: level (i+1)/17. Color: hue i/16 at full saturation and value.
/// Texture: the Color triple plus one of 16 4x4 half-density tiles.
FillSpec palette_lookup(RepresentationMode mode, ComponentType ctype);

/// 16-bit mask of the 4x4 texture tile for `pattern`; bit (y%4)*4 + x%4 set
/// means the pixel is drawn at half intensity.
std::uint16_t texture_tile(int pattern);

/// Pixel rectangle covered by `b` on a raster of `size`, for a screen of
/// screen_w x screen_h. Left/top floor, right/bottom ceil, clamped.
Bounds raster_rect(const Bounds& b, int screen_w, int screen_h, RasterSize size);

/// White canvas, components filled in descending area order (stable), so
/// smaller components paint over larger ones.
WireframeImage render(const UIScreen& screen, RepresentationMode mode, RasterSize size);

/// Two-channel binary raster: channel 0 marks text components, channel 1 the
/// rest; background is 0.
WireframeImage render_text_mask(const UIScreen& screen, RasterSize size);

// Raster export.
std::vector<std::uint8_t> encode_png(const WireframeImage& image);
void write_png(const std::string& path, const WireframeImage& image);

/// "WFIMG1", u32 width, u32 height, u32 channels, little-endian f32 payload.
std::vector<std::uint8_t> encode_tensor_file(const WireframeImage& image);
WireframeImage decode_tensor_file(std::span<const std::uint8_t> bytes);
void write_tensor_file(const std::string& path, const WireframeImage& image);
WireframeImage read_tensor_file(const std::string& path);

}  // namespace wae
