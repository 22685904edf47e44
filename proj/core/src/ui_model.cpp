#include "wae/ui_model.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json_io.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {

constexpr std::array<std::string_view, kComponentTypeCount> kNames = {
    "TextView",    "EditText",    "Button",       "ImageView",
    "CheckBox",    "RadioButton", "Switch",       "ToggleButton",
    "Spinner",     "ProgressBar", "SeekBar",      "RatingBar",
    "ListView",    "WebView",     "VideoView",    "CheckedTextView",
};

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

void fnv_u32(std::uint64_t& h, std::uint32_t v) noexcept {
  for (int i = 0; i < 4; ++i) {
    h ^= (v >> (8 * i)) & 0xFFu;
    h *= kFnvPrime;
  }
}

}  // namespace

const std::array<ComponentType, kComponentTypeCount>& all_component_types() {
  static const auto types = [] {
    std::array<ComponentType, kComponentTypeCount> out{};
    for (int i = 0; i < kComponentTypeCount; ++i) out[i] = component_from_code(i);
    return out;
  }();
  return types;
}

std::string_view component_name(ComponentType t) { return kNames.at(code(t)); }

std::optional<ComponentType> component_from_name(std::string_view name) {
  for (int i = 0; i < kComponentTypeCount; ++i) {
    if (kNames[i] == name) return component_from_code(i);
  }
  return std::nullopt;
}

bool is_text_component(ComponentType t) noexcept {
  return t == ComponentType::kTextView || t == ComponentType::kEditText ||
         t == ComponentType::kCheckedTextView;
}

Validation validate_screen(const UIScreen& screen) {
  Validation v;
  if (screen.width <= 0 || screen.height <= 0) {
    v.violations.push_back({-1, "non-positive extent"});
  }
  for (std::size_t i = 0; i < screen.components.size(); ++i) {
    const Bounds& b = screen.components[i].bounds;
    const int idx = static_cast<int>(i);
    if (b.left >= b.right || b.top >= b.bottom) {
      v.violations.push_back({idx, "degenerate bounds"});
    }
    if (b.left < 0 || b.top < 0 || b.right < 0 || b.bottom < 0) {
      v.violations.push_back({idx, "negative coordinate"});
    }
    if (b.right > screen.width || b.bottom > screen.height ||
        b.left > screen.width || b.top > screen.height) {
      v.violations.push_back({idx, "out of extent"});
    }
  }
  return v;
}

std::uint64_t sequence_hash(const UIScreen& screen) noexcept {
  std::uint64_t h = kFnvOffset;
  fnv_u32(h, static_cast<std::uint32_t>(screen.components.size()));
  for (const auto& c : screen.components) {
    fnv_u32(h, static_cast<std::uint32_t>(code(c.ctype)));
    fnv_u32(h, static_cast<std::uint32_t>(c.bounds.left));
    fnv_u32(h, static_cast<std::uint32_t>(c.bounds.top));
    fnv_u32(h, static_cast<std::uint32_t>(c.bounds.right));
    fnv_u32(h, static_cast<std::uint32_t>(c.bounds.bottom));
  }
  return h;
}

namespace detail {

using nlohmann::json;

json bounds_to_json(const Bounds& b) {
  return json{{"left", b.left}, {"top", b.top}, {"right", b.right}, {"bottom", b.bottom}};
}

Bounds bounds_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw FieldError(where + ": bounds must be an object");
  auto field = [&](const char* k) {
    auto it = j.find(k);
    if (it == j.end() || !it->is_number_integer()) {
      throw FieldError(where + ": bounds." + k + " missing or not an integer");
    }
    return it->get<int>();
  };
  return Bounds{field("left"), field("top"), field("right"), field("bottom")};
}

json component_to_json(const UIComponent& c) {
  return json{{"ctype", std::string(component_name(c.ctype))},
              {"bounds", bounds_to_json(c.bounds)}};
}

UIComponent component_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw FieldError(where + ": component must be an object");
  auto it = j.find("ctype");
  if (it == j.end() || !it->is_string()) {
    throw FieldError(where + ": ctype missing or not a string");
  }
  const auto name = it->get<std::string>();
  auto type = component_from_name(name);
  if (!type) throw FieldError(where + ": unknown ctype \"" + name + "\"");
  auto bit = j.find("bounds");
  if (bit == j.end()) throw FieldError(where + ": bounds missing");
  return UIComponent{*type, bounds_from_json(*bit, where)};
}

json screen_to_json(const UIScreen& s) {
  json comps = json::array();
  for (const auto& c : s.components) comps.push_back(component_to_json(c));
  json j{{"id", s.id}, {"width", s.width}, {"height", s.height}, {"components", comps}};
  if (s.app_id) j["app_id"] = *s.app_id;
  if (s.category) j["category"] = *s.category;
  return j;
}

UIScreen screen_from_json(const json& j) {
  if (!j.is_object()) throw FieldError("screen must be a JSON object");
  UIScreen s;
  auto str = [&](const char* k) -> std::optional<std::string> {
    auto it = j.find(k);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw FieldError(std::string("screen.") + k + " must be a string");
    return it->get<std::string>();
  };
  auto id = str("id");
  if (!id) throw FieldError("screen.id missing");
  s.id = *id;
  for (const char* k : {"width", "height"}) {
    auto it = j.find(k);
    if (it == j.end() || !it->is_number_integer()) {
      throw FieldError("screen " + s.id + ": " + k + " missing or not an integer");
    }
    (std::string_view(k) == "width" ? s.width : s.height) = it->get<int>();
  }
  auto comps = j.find("components");
  if (comps == j.end() || !comps->is_array()) {
    throw FieldError("screen " + s.id + ": components missing or not an array");
  }
  for (std::size_t i = 0; i < comps->size(); ++i) {
    s.components.push_back(component_from_json(
        (*comps)[i], "screen " + s.id + " component " + std::to_string(i)));
  }
  s.app_id = str("app_id");
  s.category = str("category");
  return s;
}

}  // namespace detail

std::string to_json_line(const UIScreen& screen) {
  return detail::screen_to_json(screen).dump();
}

UIScreen screen_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  return detail::screen_from_json(j);
}

std::vector<UIScreen> read_manifest(std::istream& in) {
  std::vector<UIScreen> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(screen_from_json(line));
    } catch (const Error& e) {
      throw FieldError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<UIScreen> read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  return read_manifest(in);
}

void write_manifest(std::ostream& out, const std::vector<UIScreen>& screens) {
  for (const auto& s : screens) out << to_json_line(s) << '\n';
}

void write_manifest_file(const std::string& path, const std::vector<UIScreen>& screens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest " + path);
  write_manifest(out, screens);
}

}  // namespace wae
