#include "wae/treatments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>

#include "wae/errors.hpp"
#include "wae/rng.hpp"

namespace wae {
namespace {

constexpr std::array<int, 6> kScalePercents = {5, 10, 15, 20, 25, 30};
constexpr std::array<int, 3> kRemovalBands = {10, 20, 30};

bool allowed_scale(int p) {
  return std::find(kScalePercents.begin(), kScalePercents.end(), p) != kScalePercents.end();
}
bool allowed_band(int p) {
  return std::find(kRemovalBands.begin(), kRemovalBands.end(), p) != kRemovalBands.end();
}

// ceil(percent * size / 100) for non-negative sizes.
int shrink_amount(int size, int percent) { return (size * percent + 99) / 100; }

void shrink_axis(int& lo, int& hi, int percent) {
  const int size = hi - lo;
  const int d = shrink_amount(size, percent);
  const int new_lo = lo + d / 2;
  const int new_hi = hi - (d - d / 2);
  if (new_hi - new_lo < 1) {
    const int center = lo + size / 2;
    lo = center;
    hi = center + 1;
  } else {
    lo = new_lo;
    hi = new_hi;
  }
}

}  // namespace

std::vector<TreatmentSpec> all_treatments(std::uint64_t seed) {
  std::vector<TreatmentSpec> out;
  for (int p : kScalePercents) out.emplace_back(ScaleTreatment{p});
  for (int b : kRemovalBands) out.emplace_back(RemoveTreatment{b, seed});
  return out;
}

TreatmentSpec parse_treatment(std::string_view text, std::uint64_t seed) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw FieldError("treatment \"" + std::string(text) + "\" must look like scale:10 or remove:20");
  }
  const auto kind = text.substr(0, colon);
  const auto num = text.substr(colon + 1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size()) {
    throw FieldError("treatment value \"" + std::string(num) + "\" is not an integer");
  }
  if (kind == "scale") {
    if (!allowed_scale(value)) throw FieldError("scale ratio must be one of 5,10,15,20,25,30");
    return ScaleTreatment{value};
  }
  if (kind == "remove") {
    if (!allowed_band(value)) throw FieldError("removal band must be one of 10,20,30");
    return RemoveTreatment{value, seed};
  }
  throw FieldError("unknown treatment kind \"" + std::string(kind) + "\"");
}

std::string treatment_label(const TreatmentSpec& spec) {
  if (const auto* s = std::get_if<ScaleTreatment>(&spec)) return "scale" + std::to_string(s->percent);
  return "remove" + std::to_string(std::get<RemoveTreatment>(spec).band_percent);
}

Bounds scale_bounds(const Bounds& b, int percent) {
  Bounds out = b;
  shrink_axis(out.left, out.right, percent);
  shrink_axis(out.top, out.bottom, percent);
  return out;
}

UIScreen scale_components(const UIScreen& screen, int percent) {
  if (!allowed_scale(percent)) {
    throw PreconditionError("scale ratio " + std::to_string(percent) + "% is not one of 5,10,15,20,25,30");
  }
  UIScreen out = screen;
  for (auto& c : out.components) c.bounds = scale_bounds(c.bounds, percent);
  return out;
}

RemovalResult remove_components(const UIScreen& screen, int band_percent, std::uint64_t seed) {
  if (!allowed_band(band_percent)) {
    throw PreconditionError("removal band " + std::to_string(band_percent) + "% is not one of 10,20,30");
  }
  const std::size_t n = screen.components.size();
  if (n < static_cast<std::size_t>(kMinComponentsForRemoval)) {
    throw PreconditionError("screen " + screen.id + " has " + std::to_string(n) +
                            " components; removal needs at least 5");
  }
  std::int64_t total = 0;
  for (const auto& c : screen.components) total += c.bounds.area();
  const std::int64_t low = band_percent - kRemovalHalfWidthPercent;
  const std::int64_t high = band_percent + kRemovalHalfWidthPercent;

  SplitMix64 rng(seed);
  std::vector<std::size_t> order(n);
  for (int attempt = 0; attempt < kRemovalAttempts; ++attempt) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::int64_t removed_area = 0;
    std::vector<std::size_t> removed;
    // Integer form of removed/total < low/100.
    for (std::size_t idx : order) {
      if (100 * removed_area >= low * total) break;
      removed.push_back(idx);
      removed_area += screen.components[idx].bounds.area();
    }
    if (100 * removed_area >= low * total && 100 * removed_area <= high * total &&
        removed.size() < n) {
      std::sort(removed.begin(), removed.end());
      RemovalResult result;
      result.screen = screen;
      result.screen.components.clear();
      for (std::size_t i = 0, r = 0; i < n; ++i) {
        if (r < removed.size() && removed[r] == i) {
          ++r;
          continue;
        }
        result.screen.components.push_back(screen.components[i]);
      }
      result.removed = std::move(removed);
      result.fraction = total > 0 ? static_cast<double>(removed_area) / static_cast<double>(total) : 0.0;
      return result;
    }
  }
  throw InfeasibleError("screen " + screen.id + ": no removal subset within " +
                        std::to_string(band_percent) + "% +/- 5% after 64 shuffles");
}

UIScreen apply_treatment(const UIScreen& screen, const TreatmentSpec& spec, std::uint64_t screen_seed) {
  if (const auto* s = std::get_if<ScaleTreatment>(&spec)) return scale_components(screen, s->percent);
  return remove_components(screen, std::get<RemoveTreatment>(spec).band_percent, screen_seed).screen;
}

PairSet make_pairs(const std::vector<UIScreen>& corpus, const TreatmentSpec& spec) {
  PairSet out;
  const std::string label = treatment_label(spec);
  const std::uint64_t base_seed =
      std::holds_alternative<RemoveTreatment>(spec) ? std::get<RemoveTreatment>(spec).seed : 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& screen = corpus[i];
    try {
      UIScreen treated = apply_treatment(screen, spec, derive_seed(base_seed, i));
      treated.id = screen.id + "~" + label;
      out.pairs.push_back({screen.id, std::move(treated)});
    } catch (const PreconditionError& e) {
      out.skipped.push_back({screen.id, e.what()});
    } catch (const InfeasibleError& e) {
      out.skipped.push_back({screen.id, e.what()});
    }
  }
  return out;
}

}  // namespace wae
