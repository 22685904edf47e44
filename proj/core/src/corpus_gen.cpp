#include "wae/corpus_gen.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "wae/errors.hpp"
#include "wae/rng.hpp"

namespace wae {
namespace {

constexpr std::array<std::string_view, kTemplateKindCount> kTemplateNames = {
    "form", "list", "grid", "navdrawer", "settings", "mixed"};

constexpr int kCanvasW = 360;  // dp
constexpr int kCanvasH = 640;
constexpr int kMaxComponents = 30;
constexpr int kMinComponents = 3;

using CT = ComponentType;

// Collects components on the dp canvas. Everything snaps to a 4 dp grid.
class Layout {
 public:
  explicit Layout(SplitMix64& rng) : rng_(rng) {}

  SplitMix64& rng() { return rng_; }

  // Returns false (and adds nothing) when the rectangle leaves the canvas or
  // the component budget is spent.
  bool add(CT type, int left, int top, int width, int height) {
    left = snap(left);
    top = snap(top);
    width = std::max(4, snap(width));
    height = std::max(4, snap(height));
    if (left < 0 || top < 0 || left + width > kCanvasW || top + height > kCanvasH) return false;
    if (static_cast<int>(items_.size()) >= kMaxComponents) return false;
    items_.push_back({type, Bounds{left, top, left + width, top + height}});
    return true;
  }

  bool full() const { return static_cast<int>(items_.size()) >= kMaxComponents; }
  std::size_t size() const { return items_.size(); }
  std::vector<UIComponent>& items() { return items_; }

  // Top app bar. Returns the y below it.
  int app_bar(bool with_nav, int actions) {
    const int h = pick({48, 56, 56, 64});
    const int icon = 48;
    const int pad = (h - icon) / 2;
    int title_left = 16;
    if (with_nav) {
      add(CT::kButton, 4, pad, icon, icon);
      title_left = 72;
    }
    const int title_h = pick({20, 24, 28});
    const int title_w = rng_.range(20, 50) * 4;
    add(CT::kTextView, title_left, (h - title_h) / 2, title_w, title_h);
    for (int i = 0; i < actions; ++i) {
      add(CT::kButton, kCanvasW - 4 - icon * (i + 1), pad, icon, icon);
    }
    return h;
  }

  int pick(std::initializer_list<int> options) {
    return *(options.begin() + rng_.below(options.size()));
  }
  CT pick_type(std::initializer_list<CT> options) {
    return *(options.begin() + rng_.below(options.size()));
  }

  static int snap(int v) { return (v / 4) * 4; }

 private:
  SplitMix64& rng_;
  std::vector<UIComponent> items_;
};

void build_form(Layout& L) {
  auto& r = L.rng();
  const bool bar = r.chance(0.8);
  const bool logo = r.chance(0.5);
  const bool heading = r.chance(0.6);
  const bool labels = r.chance(0.4);
  const bool check = r.chance(0.4);
  const bool radios = r.chance(0.2);
  const bool footer = r.chance(0.5);
  const int margin = L.pick({16, 16, 24, 32});
  const int inner_w = kCanvasW - 2 * margin;
  const int field_h = L.pick({40, 48, 48, 56});
  const int gap = L.pick({8, 12, 16, 24});
  const int btn_h = L.pick({40, 48, 48, 56});
  const int logo_size = r.range(16, 40) * 4;
  const int logo_gap = r.range(4, 12) * 4;
  const int heading_h = L.pick({24, 28, 32, 40});
  const int heading_gap = r.range(3, 6) * 4;
  const int button_gap = r.range(4, 10) * 4;

  int y = bar ? L.app_bar(r.chance(0.7), r.range(0, 1)) : 24;
  const int per_field = gap + (labels ? 20 : 0) + field_h;
  const int tail = (check ? 36 : 0) + (radios ? 44 : 0) + button_gap + btn_h + (footer ? 36 : 0) + 8;
  const int head = (logo ? logo_gap + logo_size : 0) + (heading ? heading_gap + heading_h : 0);
  const bool keep_logo = logo && kCanvasH - y - head - tail >= per_field;

  if (keep_logo) {
    y += logo_gap;
    L.add(CT::kImageView, (kCanvasW - logo_size) / 2, y, logo_size, logo_size);
    y += logo_size;
  }
  if (heading) {
    y += heading_gap;
    L.add(CT::kTextView, margin, y, inner_w - r.range(0, 16) * 4, heading_h);
    y += heading_h;
  }
  const int fit = std::max(1, (kCanvasH - y - tail) / per_field);
  const int fields = std::min(r.range(2, 6), fit);
  for (int i = 0; i < fields; ++i) {
    y += gap;
    if (labels) {
      L.add(CT::kTextView, margin, y, r.range(15, 40) * 4, 16);
      y += 20;
    }
    const auto type = (i > 0 && r.chance(0.1)) ? CT::kSpinner : CT::kEditText;
    L.add(type, margin, y, inner_w, field_h);
    y += field_h;
  }
  if (check) {
    y += 12;
    L.add(CT::kCheckBox, margin, y, 24, 24);
    L.add(r.chance(0.8) ? CT::kTextView : CT::kCheckedTextView, margin + 36, y, r.range(20, 50) * 4, 24);
    y += 24;
  }
  if (radios) {
    y += 12;
    const int n = r.range(2, 3);
    const int w = inner_w / n;
    for (int i = 0; i < n; ++i) L.add(CT::kRadioButton, margin + i * w, y, w - 8, 32);
    y += 32;
  }
  y = std::min(y + button_gap, kCanvasH - btn_h - 8);
  if (r.chance(0.3)) {
    const int w = (inner_w - 16) / 2;
    L.add(CT::kButton, margin, y, w, btn_h);
    L.add(CT::kButton, margin + w + 16, y, w, btn_h);
  } else {
    L.add(CT::kButton, margin, y, inner_w, btn_h);
  }
  y += btn_h;
  if (footer) {
    y += 16;
    const int w = r.range(30, 60) * 4;
    L.add(CT::kTextView, (kCanvasW - w) / 2, y, w, 20);
  }
}

void build_list(Layout& L) {
  auto& r = L.rng();
  int y = L.app_bar(r.chance(0.6), r.range(0, 2));
  if (r.chance(0.4)) {
    y += 8;
    L.add(CT::kEditText, 16, y, kCanvasW - 32, 40);
    y += 48;
  }
  if (r.chance(0.3)) {
    const int tabs = r.range(2, 4);
    const int w = kCanvasW / tabs;
    for (int i = 0; i < tabs; ++i) L.add(CT::kTextView, i * w + 8, y + 12, w - 16, 24);
    y += 48;
  }
  const int row_h = L.pick({56, 64, 72, 72, 88, 96});
  const bool thumbs = r.chance(0.75);
  const bool subtitle = r.chance(0.6);
  const CT trailing = L.pick_type({CT::kTextView, CT::kCheckBox, CT::kButton, CT::kRatingBar,
                                   CT::kImageView, CT::kTextView});
  const bool has_trailing = r.chance(0.5);
  const int thumb = row_h - 16;
  const int rows = r.range(3, 9);
  for (int i = 0; i < rows && y + row_h <= kCanvasH; ++i) {
    int text_left = 16;
    if (thumbs) {
      L.add(CT::kImageView, 16, y + 8, thumb, thumb);
      text_left = 16 + thumb + 16;
    }
    int text_right = kCanvasW - 16;
    if (has_trailing) {
      int tw = 24, th = 24;
      if (trailing == CT::kTextView) tw = 48, th = 16;
      if (trailing == CT::kButton) tw = 48, th = 48;
      if (trailing == CT::kRatingBar) tw = 80, th = 16;
      if (trailing == CT::kImageView) tw = 24, th = 24;
      L.add(trailing, kCanvasW - 16 - tw, y + (row_h - th) / 2, tw, th);
      text_right -= tw + 16;
    }
    const int title_w = std::min(text_right - text_left, r.range(20, 60) * 4);
    if (subtitle) {
      L.add(CT::kTextView, text_left, y + row_h / 2 - 20, title_w, 20);
      L.add(CT::kTextView, text_left, y + row_h / 2 + 4, std::min(text_right - text_left, r.range(20, 60) * 4), 16);
    } else {
      L.add(CT::kTextView, text_left, y + (row_h - 20) / 2, title_w, 20);
    }
    y += row_h;
  }
  if (r.chance(0.4)) L.add(CT::kButton, kCanvasW - 16 - 56, kCanvasH - 16 - 56, 56, 56);
}

void build_grid(Layout& L) {
  auto& r = L.rng();
  int y = L.app_bar(r.chance(0.5), r.range(0, 2));
  if (r.chance(0.35)) {
    y += 8;
    L.add(CT::kSpinner, 16, y, r.range(30, 50) * 4, 40);
    y += 48;
  }
  const int cols = r.range(2, 3);
  const int gutter = L.pick({4, 8, 12, 16});
  const int margin = L.pick({0, 8, 16});
  const int cell_w = Layout::snap((kCanvasW - 2 * margin - (cols - 1) * gutter) / cols);
  const int img_h = Layout::snap(cell_w * L.pick({3, 4, 4, 5}) / 4);
  const bool caption = r.chance(0.8);
  const bool price = r.chance(0.4);
  const bool rating = r.chance(0.2);
  const int rows = r.range(2, 4);
  y += gutter;
  for (int row = 0; row < rows; ++row) {
    int cell_h = img_h;
    for (int c = 0; c < cols; ++c) {
      const int x = margin + c * (cell_w + gutter);
      int cy = y;
      if (!L.add(CT::kImageView, x, cy, cell_w, img_h)) break;
      cy += img_h + 4;
      if (caption) L.add(CT::kTextView, x + 4, cy, cell_w - 8 - r.range(0, 6) * 4, 20), cy += 24;
      if (price) L.add(CT::kTextView, x + 4, cy, r.range(10, 16) * 4, 16), cy += 20;
      if (rating) L.add(CT::kRatingBar, x + 4, cy, 80, 16), cy += 20;
      cell_h = cy - y;
    }
    y += cell_h + gutter;
    if (y >= kCanvasH) break;
  }
}

void build_nav_drawer(Layout& L) {
  auto& r = L.rng();
  const int drawer_w = L.pick({280, 296, 304, 320});
  if (r.chance(0.5)) {
    // Dimmed content behind the drawer.
    L.add(CT::kImageView, drawer_w, 0, kCanvasW - drawer_w, kCanvasH);
  }
  const int header_h = r.range(35, 45) * 4;
  L.add(CT::kImageView, 0, 0, drawer_w, header_h);
  const int avatar = L.pick({56, 64, 72});
  L.add(CT::kImageView, 16, 24, avatar, avatar);
  L.add(CT::kTextView, 16, header_h - 56, r.range(25, 50) * 4, 20);
  if (r.chance(0.7)) L.add(CT::kTextView, 16, header_h - 32, r.range(30, 60) * 4, 16);
  int y = header_h + 8;
  const int items = r.range(4, 9);
  const int item_h = L.pick({48, 48, 56});
  const bool icons = r.chance(0.8);
  for (int i = 0; i < items && y + item_h <= kCanvasH; ++i) {
    if (i > 0 && r.chance(0.15)) {
      L.add(CT::kTextView, 16, y + 12, r.range(15, 30) * 4, 16);
      y += 40;
      if (y + item_h > kCanvasH) break;
    }
    if (icons) L.add(CT::kImageView, 16, y + (item_h - 24) / 2, 24, 24);
    L.add(CT::kTextView, icons ? 72 : 16, y + (item_h - 20) / 2, r.range(20, 45) * 4, 20);
    if (r.chance(0.1)) L.add(CT::kSwitch, drawer_w - 16 - 40, y + (item_h - 24) / 2, 40, 24);
    y += item_h;
  }
}

void build_settings(Layout& L) {
  auto& r = L.rng();
  int y = L.app_bar(true, r.range(0, 1));
  const int rows = r.range(4, 9);
  const int row_h = L.pick({48, 56, 64, 72});
  for (int i = 0; i < rows && y + row_h <= kCanvasH; ++i) {
    if (r.chance(0.2)) {
      L.add(CT::kTextView, 16, y + 16, r.range(20, 40) * 4, 16);
      y += 40;
      if (y + row_h > kCanvasH) break;
    }
    const double roll = r.uniform();
    if (roll < 0.1) {
      L.add(CT::kTextView, 16, y + 4, r.range(20, 50) * 4, 20);
      L.add(CT::kSeekBar, 16, y + 28, kCanvasW - 32, 24);
      y += std::max(row_h, 56);
      continue;
    }
    const bool summary = r.chance(0.5);
    const int label_w = r.range(30, 60) * 4;
    if (summary) {
      L.add(CT::kTextView, 16, y + row_h / 2 - 20, label_w, 20);
      L.add(CT::kTextView, 16, y + row_h / 2 + 4, r.range(30, 60) * 4, 16);
    } else {
      L.add(CT::kTextView, 16, y + (row_h - 20) / 2, label_w, 20);
    }
    if (roll < 0.6) {
      L.add(CT::kSwitch, kCanvasW - 16 - 40, y + (row_h - 24) / 2, 40, 24);
    } else if (roll < 0.75) {
      L.add(CT::kCheckBox, kCanvasW - 16 - 24, y + (row_h - 24) / 2, 24, 24);
    } else if (roll < 0.85) {
      L.add(CT::kSpinner, kCanvasW - 16 - 96, y + (row_h - 32) / 2, 96, 32);
    } else if (roll < 0.9) {
      L.add(CT::kToggleButton, kCanvasW - 16 - 64, y + (row_h - 32) / 2, 64, 32);
    }
    y += row_h;
  }
}

void build_mixed(Layout& L) {
  auto& r = L.rng();
  int y = r.chance(0.7) ? L.app_bar(r.chance(0.5), r.range(0, 2)) : 0;
  const bool bottom_nav = r.chance(0.3);
  const int limit = bottom_nav ? kCanvasH - 56 : kCanvasH;
  int guard = 0;
  while (y < limit - 40 && !L.full() && guard++ < 16) {
    y += L.pick({8, 12, 16});
    const int block = static_cast<int>(r.below(11));
    int used = 0;
    switch (block) {
      case 0: {  // banner
        const int h = r.range(30, 60) * 4;
        if (L.add(CT::kImageView, r.chance(0.5) ? 0 : 16, y, r.chance(0.5) ? kCanvasW : kCanvasW - 32, h)) used = h;
        break;
      }
      case 1: {  // video
        const int h = 200;
        if (L.add(CT::kVideoView, 0, y, kCanvasW, h)) used = h;
        break;
      }
      case 2: {  // paragraph
        const int h = r.range(5, 30) * 4;
        if (L.add(CT::kTextView, 16, y, kCanvasW - 32 - r.range(0, 10) * 4, h)) used = h;
        break;
      }
      case 3: {  // progress
        if (r.chance(0.5)) {
          if (L.add(CT::kProgressBar, 16, y, kCanvasW - 32, 8)) used = 8;
        } else if (L.add(CT::kProgressBar, (kCanvasW - 48) / 2, y, 48, 48)) {
          used = 48;
        }
        break;
      }
      case 4: {  // rating row
        L.add(CT::kTextView, 16, y, r.range(15, 30) * 4, 20);
        if (L.add(CT::kRatingBar, kCanvasW - 16 - 120, y, 120, 24)) used = 24;
        break;
      }
      case 5: {  // toggles
        const int n = r.range(2, 3);
        const int w = (kCanvasW - 32) / n;
        for (int i = 0; i < n; ++i) L.add(CT::kToggleButton, 16 + i * w, y, w - 8, 40);
        used = 40;
        break;
      }
      case 6: {  // radio column
        const int n = r.range(2, 4);
        for (int i = 0; i < n; ++i) L.add(CT::kRadioButton, 16, y + i * 40, r.range(30, 60) * 4, 32);
        used = n * 40;
        break;
      }
      case 7: {  // checked list
        const int n = r.range(2, 4);
        for (int i = 0; i < n; ++i) L.add(CT::kCheckedTextView, 16, y + i * 48, kCanvasW - 32, 40);
        used = n * 48;
        break;
      }
      case 8: {  // advert strip
        const int h = L.pick({48, 52, 60});
        if (L.add(CT::kWebView, 0, y, kCanvasW, h)) used = h;
        break;
      }
      case 9: {  // buttons
        const int n = r.range(1, 2);
        const int w = (kCanvasW - 32 - (n - 1) * 16) / n;
        for (int i = 0; i < n; ++i) L.add(CT::kButton, 16 + i * (w + 16), y, w, 48);
        used = 48;
        break;
      }
      default: {  // labelled seek/spinner
        L.add(CT::kTextView, 16, y, r.range(20, 40) * 4, 20);
        if (L.add(r.chance(0.5) ? CT::kSeekBar : CT::kSpinner, 16, y + 24, kCanvasW - 32, 32)) used = 56;
        break;
      }
    }
    if (used == 0) break;
    y += used;
  }
  if (bottom_nav) {
    const int n = r.range(3, 5);
    const int w = kCanvasW / n;
    for (int i = 0; i < n; ++i) L.add(CT::kButton, i * w, kCanvasH - 56, w, 56);
  }
}

// Linear dp -> px map. Snapped dp values make the mapping monotone, so
// distinct dp rectangles stay distinct unless the extent is tiny.
int to_px(int dp, int extent, int canvas) {
  return static_cast<int>((static_cast<std::int64_t>(dp) * extent + canvas / 2) / canvas);
}

}  // namespace

std::string_view template_name(TemplateKind kind) {
  return kTemplateNames.at(static_cast<int>(kind));
}

std::optional<TemplateKind> template_from_name(std::string_view name) {
  for (int i = 0; i < kTemplateKindCount; ++i) {
    if (kTemplateNames[i] == name) return static_cast<TemplateKind>(i);
  }
  return std::nullopt;
}

TemplateMix TemplateMix::parse(std::string_view text) {
  TemplateMix mix;
  mix.weights.fill(0.0);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(pos, end - pos);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw FieldError("mix entry \"" + std::string(item) + "\" lacks '='");
    auto kind = template_from_name(item.substr(0, eq));
    if (!kind) throw FieldError("unknown template kind \"" + std::string(item.substr(0, eq)) + "\"");
    const std::string value(item.substr(eq + 1));
    double w = 0;
    try {
      std::size_t used = 0;
      w = std::stod(value, &used);
      if (used != value.size()) throw FieldError("");
    } catch (...) {
      throw FieldError("mix weight \"" + value + "\" is not a number");
    }
    if (w < 0) throw FieldError("mix weight must be non-negative");
    mix.weights[static_cast<int>(*kind)] = w;
    pos = end + 1;
  }
  double total = 0;
  for (double w : mix.weights) total += w;
  if (total <= 0) throw FieldError("mix has no positive weight");
  return mix;
}

UIScreen generate_screen(std::uint64_t seed, TemplateKind kind, Extent extent) {
  if (extent.width < kMinGeneratorExtent.width || extent.height < kMinGeneratorExtent.height) {
    throw PreconditionError("generator extent must be at least 90x160");
  }
  SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  Layout layout(rng);
  switch (kind) {
    case TemplateKind::kForm: build_form(layout); break;
    case TemplateKind::kList: build_list(layout); break;
    case TemplateKind::kGrid: build_grid(layout); break;
    case TemplateKind::kNavDrawer: build_nav_drawer(layout); break;
    case TemplateKind::kSettings: build_settings(layout); break;
    case TemplateKind::kMixed: build_mixed(layout); break;
  }
  // Footer fillers for sparse layouts.
  for (int i = 0; layout.size() < static_cast<std::size_t>(kMinComponents); ++i) {
    layout.add(CT::kTextView, 16 + 8 * i, kCanvasH - 40 - 28 * i, 160, 20);
  }

  UIScreen s;
  s.width = extent.width;
  s.height = extent.height;
  s.category = std::string(template_name(kind));
  std::vector<Bounds> seen;
  for (const auto& c : layout.items()) {
    Bounds b{to_px(c.bounds.left, extent.width, kCanvasW), to_px(c.bounds.top, extent.height, kCanvasH),
             to_px(c.bounds.right, extent.width, kCanvasW), to_px(c.bounds.bottom, extent.height, kCanvasH)};
    if (b.right <= b.left || b.bottom <= b.top) continue;
    if (std::find(seen.begin(), seen.end(), b) != seen.end()) continue;
    seen.push_back(b);
    s.components.push_back({c.ctype, b});
  }
  return s;
}

std::vector<UIScreen> generate_corpus(std::uint64_t seed, std::size_t n, const TemplateMix& mix,
                                      Extent extent) {
  double total = 0;
  for (double w : mix.weights) total += w;
  if (total <= 0) throw PreconditionError("template mix has no positive weight");

  std::vector<UIScreen> out;
  out.reserve(n);
  std::unordered_set<std::uint64_t> hashes;
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 picker(derive_seed(seed, i));
    const double u = picker.uniform() * total;
    int kind = 0;
    double acc = 0;
    for (; kind < kTemplateKindCount - 1; ++kind) {
      acc += mix.weights[kind];
      if (u < acc && mix.weights[kind] > 0) break;
    }
    while (mix.weights[kind] <= 0) --kind;  // only reachable through rounding at the top end

    UIScreen s;
    for (std::uint64_t attempt = 0;; ++attempt) {
      s = generate_screen(derive_seed(derive_seed(seed, i), attempt + 1),
                          static_cast<TemplateKind>(kind), extent);
      if (hashes.insert(sequence_hash(s)).second) break;
    }
    s.id = "syn-" + std::to_string(seed) + "-" + std::to_string(i);
    s.app_id = "syn-app-" + std::to_string(derive_seed(seed, i) % 97);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wae
