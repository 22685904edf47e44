#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wae {

/// The 16 wireframe component types. The integer value is the stable code.
enum class ComponentType : std::uint8_t {
  kTextView = 0,
  kEditText,
  kButton,
  kImageView,
  kCheckBox,
  kRadioButton,
  kSwitch,
  kToggleButton,
  kSpinner,
  kProgressBar,
  kSeekBar,
  kRatingBar,
  kListView,
  kWebView,
  kVideoView,
  kCheckedTextView,
};

inline constexpr int kComponentTypeCount = 16;

constexpr int code(ComponentType t) noexcept { return static_cast<int>(t); }

/// Type for a code in [0, 16). Precondition: valid code.
constexpr ComponentType component_from_code(int code) noexcept {
  return static_cast<ComponentType>(code);
}

const std::array<ComponentType, kComponentTypeCount>& all_component_types();

/// Roster spelling, e.g. "TextView".
std::string_view component_name(ComponentType t);
std::optional<ComponentType> component_from_name(std::string_view name);

/// TextView, EditText and CheckedTextView carry text.
bool is_text_component(ComponentType t) noexcept;

/// Half-open pixel rectangle [left, right) x [top, bottom).
struct Bounds {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  constexpr int width() const noexcept { return right - left; }
  constexpr int height() const noexcept { return bottom - top; }
  constexpr std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width()) * height();
  }
  friend constexpr bool operator==(const Bounds&, const Bounds&) = default;
};

struct UIComponent {
  ComponentType ctype = ComponentType::kTextView;
  Bounds bounds;
  friend bool operator==(const UIComponent&, const UIComponent&) = default;
};

struct UIScreen {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<UIComponent> components;  // document order
  std::optional<std::string> app_id;
  std::optional<std::string> category;

  friend bool operator==(const UIScreen&, const UIScreen&) = default;
};

struct Violation {
  int component_index;  // -1 for screen-level violations
  std::string rule;
};

struct Validation {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Rules reported: "non-positive extent", "degenerate bounds",
// "negative coordinate", "out of extent".
Validation validate_screen(const UIScreen& screen);

/// Order-sensitive 64-bit FNV-1a digest of the (type code, bounds) sequence.
std::uint64_t sequence_hash(const UIScreen& screen) noexcept;

// Corpus manifest: one JSON object per line. Keys are emitted sorted, so the
// serialization of a screen is canonical.
std::string to_json_line(const UIScreen& screen);
UIScreen screen_from_json(std::string_view text);

std::vector<UIScreen> read_manifest(std::istream& in);
std::vector<UIScreen> read_manifest_file(const std::string& path);
void write_manifest(std::ostream& out, const std::vector<UIScreen>& screens);
void write_manifest_file(const std::string& path,
                         const std::vector<UIScreen>& screens);

}  // namespace wae
