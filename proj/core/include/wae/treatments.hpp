#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wae/ui_model.hpp"

namespace wae {

/// Shrink every component toward its center by `percent` of its size.
struct ScaleTreatment {
  int percent = 10;  // one of 5, 10, 15, 20, 25, 30
  friend bool operator==(const ScaleTreatment&, const ScaleTreatment&) = default;
};

/// Remove components covering band +/- 5 % of the total component area.
struct RemoveTreatment {
  int band_percent = 20;  // one of 10, 20, 30
  std::uint64_t seed = 0;
  friend bool operator==(const RemoveTreatment&, const RemoveTreatment&) = default;
};

using TreatmentSpec = std::variant<ScaleTreatment, RemoveTreatment>;

inline constexpr int kRemovalHalfWidthPercent = 5;
inline constexpr int kMinComponentsForRemoval = 5;
inline constexpr int kRemovalAttempts = 64;

/// The nine treatments, scale 5..30 then removal 10..30.
std::vector<TreatmentSpec> all_treatments(std::uint64_t seed = 0);

/// "scale:10" / "remove:20". Throws FieldError for values outside the
/// allowed sets.
TreatmentSpec parse_treatment(std::string_view text, std::uint64_t seed = 0);
/// Short label, e.g. "scale10" or "remove20".
std::string treatment_label(const TreatmentSpec& spec);

/// New bounds for one component: shrink dw = ceil(p*w), dh = ceil(p*h);
/// left/top move by floor(d/2), right/bottom by ceil(d/2). Collapsed results
/// become a 1 px extent at the center.
Bounds scale_bounds(const Bounds& b, int percent);

UIScreen scale_components(const UIScreen& screen, int percent);

struct RemovalResult {
  UIScreen screen;
  std::vector<std::size_t> removed;  // indices into the input, ascending
  double fraction = 0.0;             // removed area / total component area
};

/// Seeded greedy removal: shuffle, add components while the removed fraction
/// is below band-5 %, accept when it lands inside the band, else reshuffle.
/// Throws PreconditionError (< 5 components) or InfeasibleError.
RemovalResult remove_components(const UIScreen& screen, int band_percent, std::uint64_t seed);

UIScreen apply_treatment(const UIScreen& screen, const TreatmentSpec& spec, std::uint64_t screen_seed);

struct TreatedPair {
  std::string original_id;
  UIScreen treated;
};

struct Skip {
  std::string id;
  std::string reason;
};

struct PairSet {
  std::vector<TreatedPair> pairs;
  std::vector<Skip> skipped;
};

/// One treated variant per eligible screen. Removal seeds are derived per
/// screen index from the treatment seed. Treated ids are "<original>~<label>".
PairSet make_pairs(const std::vector<UIScreen>& corpus, const TreatmentSpec& spec);

}  // namespace wae
