#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wae/ui_model.hpp"

namespace wae {

enum class TemplateKind : std::uint8_t { kForm, kList, kGrid, kNavDrawer, kSettings, kMixed };

inline constexpr int kTemplateKindCount = 6;

std::string_view template_name(TemplateKind kind);
std::optional<TemplateKind> template_from_name(std::string_view name);

struct Extent {
  int width = 1080;
  int height = 1920;
};

/// Smallest extent the generator accepts; below it components collapse.
inline constexpr Extent kMinGeneratorExtent{90, 160};

/// Relative weights per template kind, indexed by TemplateKind.
struct TemplateMix {
  std::array<double, kTemplateKindCount> weights{1, 1, 1, 1, 1, 1};

  /// "form=0.3,list=0.2,..." Unlisted kinds get weight 0. Throws FieldError.
  static TemplateMix parse(std::string_view text);
};

/// Deterministic in (seed, kind, extent). Layouts are built on a 360x640 dp
/// canvas with a 4 dp grid and scaled to the extent. Produces 3..30
/// components with pairwise distinct bounds.
UIScreen generate_screen(std::uint64_t seed, TemplateKind kind, Extent extent = {});

/// n screens with ids "syn-<seed>-<i>", unique under sequence_hash.
std::vector<UIScreen> generate_corpus(std::uint64_t seed, std::size_t n,
                                      const TemplateMix& mix = {}, Extent extent = {});

}  // namespace wae
