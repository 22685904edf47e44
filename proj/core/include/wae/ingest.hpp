#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wae/ui_model.hpp"

namespace wae {

/// One <node> of a uiautomator-style hierarchy dump.
struct RawNode {
  std::string class_name;
  std::optional<Bounds> bounds;
  bool visible = true;
  std::string package_name;
  std::vector<RawNode> children;
};

/// Parses a hierarchy dump. The document element is either a single <node>
/// or a <hierarchy> wrapper; with a wrapper holding several top-level nodes
/// a synthetic root spanning their union is returned.
///
/// Throws ParseError (with byte offset) on malformed XML and FieldError for a
/// bad bounds attribute.
RawNode parse_dump(std::string_view document);

/// "[l,t][r,b]" -> Bounds. Throws FieldError on syntax or if left >= right,
/// top >= bottom, or a coordinate is negative.
Bounds parse_bounds(std::string_view text, std::string_view node_name);

enum class ClassMapKind { kRoster, kMerged, kDropped, kUnknown };

struct ClassMapping {
  ClassMapKind kind = ClassMapKind::kUnknown;
  ComponentType ctype = ComponentType::kTextView;  // valid for kRoster/kMerged

  bool emits() const noexcept {
    return kind == ClassMapKind::kRoster || kind == ClassMapKind::kMerged;
  }
  friend bool operator==(const ClassMapping&, const ClassMapping&) = default;
};

/// Exact mapping on the simple class name (text after the last '.').
ClassMapping map_class(std::string_view class_name);

/// map_class, then for unknown names a longest-suffix match against the
/// roster, merge and drop names (e.g. "AppCompatButton" -> Button).
ClassMapping resolve_class(std::string_view class_name);

struct ScreenMetadata {
  std::optional<std::string> app_id;
  std::optional<std::string> category;
};

/// Flattens a parsed tree into a screen in document order. Only visible,
/// mapped nodes with no mapped visible descendants are emitted. Coordinates
/// are made relative to the root bounds and clipped to the extent.
UIScreen extract_screen(const RawNode& root, std::string id,
                        const ScreenMetadata& metadata = {});

enum class FilterVerdict { kKeep, kRejectWebView, kRejectTrivial };

inline constexpr int kMinMeaningfulComponents = 2;

/// Rejects screens whose WebView area exceeds half of the screen, or with
/// fewer than two components.
FilterVerdict filter_screen(const UIScreen& screen);

struct IngestReport {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_webview = 0;
  std::uint64_t rejected_trivial = 0;
  std::uint64_t rejected_duplicate = 0;

  std::uint64_t total() const noexcept {
    return accepted + rejected_webview + rejected_trivial + rejected_duplicate;
  }
  std::string to_json() const;
  friend bool operator==(const IngestReport&, const IngestReport&) = default;
};

struct DedupResult {
  std::vector<UIScreen> unique;
  IngestReport report;
};

/// Keeps the first occurrence of each sequence_hash.
DedupResult dedup(std::vector<UIScreen> screens);

/// Serial single-consumer stage: filter then dedup, one screen at a time.
class Ingestor {
 public:
  /// Returns true if the screen was accepted.
  bool offer(UIScreen screen);

  const std::vector<UIScreen>& accepted() const noexcept { return accepted_; }
  std::vector<UIScreen> take_accepted() { return std::move(accepted_); }
  const IngestReport& report() const noexcept { return report_; }

 private:
  std::unordered_set<std::uint64_t> seen_;
  std::vector<UIScreen> accepted_;
  IngestReport report_;
};

}  // namespace wae
