#include "wae/ingest.hpp"

#include <expat.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <memory>

#include "json.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {

struct ParseState {
  std::vector<RawNode> roots;
  std::vector<RawNode*> stack;  // open <node> elements
  std::string pending_error;
  std::size_t error_offset = 0;
  XML_Parser parser = nullptr;
};

const char* find_attr(const XML_Char** attrs, std::string_view name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (name == attrs[i]) return attrs[i + 1];
  }
  return nullptr;
}

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<ParseState*>(user);
  if (!st->pending_error.empty()) return;
  if (std::string_view(name) != "node") return;

  RawNode node;
  if (const char* cls = find_attr(attrs, "class")) node.class_name = cls;
  if (const char* pkg = find_attr(attrs, "package")) node.package_name = pkg;
  if (const char* vis = find_attr(attrs, "visible-to-user")) {
    node.visible = std::string_view(vis) != "false";
  }
  if (const char* b = find_attr(attrs, "bounds")) {
    try {
      node.bounds = parse_bounds(b, node.class_name.empty() ? "<node>" : node.class_name);
    } catch (const FieldError& e) {
      st->pending_error = e.what();
      st->error_offset = static_cast<std::size_t>(XML_GetCurrentByteIndex(st->parser));
      XML_StopParser(st->parser, XML_FALSE);
      return;
    }
  }

  if (st->stack.empty()) {
    st->roots.push_back(std::move(node));
    st->stack.push_back(&st->roots.back());
  } else {
    auto& siblings = st->stack.back()->children;
    siblings.push_back(std::move(node));
    st->stack.push_back(&siblings.back());
  }
}

void XMLCALL on_end(void* user, const XML_Char* name) {
  auto* st = static_cast<ParseState*>(user);
  if (std::string_view(name) == "node" && !st->stack.empty()) st->stack.pop_back();
}

// Simple class name: text after the last '.' or '$'.
std::string_view simple_name(std::string_view cls) {
  auto pos = cls.find_last_of(".$");
  return pos == std::string_view::npos ? cls : cls.substr(pos + 1);
}

struct NameRule {
  std::string_view name;
  ClassMapping mapping;
};

const std::vector<NameRule>& name_rules() {
  static const std::vector<NameRule> rules = [] {
    std::vector<NameRule> r;
    for (auto t : all_component_types()) {
      r.push_back({component_name(t), {ClassMapKind::kRoster, t}});
    }
    r.push_back({"MultiAutoCompleteTextView", {ClassMapKind::kMerged, ComponentType::kEditText}});
    r.push_back({"ImageButton", {ClassMapKind::kMerged, ComponentType::kButton}});
    for (std::string_view d : {"CalendarView", "CalenderView", "TimePicker", "DatePicker"}) {
      r.push_back({d, {ClassMapKind::kDropped, ComponentType::kTextView}});
    }
    // Longest first so suffix matching prefers the most specific name.
    std::stable_sort(r.begin(), r.end(), [](const NameRule& a, const NameRule& b) {
      return a.name.size() > b.name.size();
    });
    return r;
  }();
  return rules;
}

bool has_mapped_descendant(const RawNode& node) {
  for (const auto& child : node.children) {
    if (child.visible && child.bounds && resolve_class(child.class_name).emits()) return true;
    if (has_mapped_descendant(child)) return true;
  }
  return false;
}

void flatten(const RawNode& node, const Bounds& extent, std::vector<UIComponent>& out) {
  if (node.visible && node.bounds) {
    auto m = resolve_class(node.class_name);
    if (m.emits() && !has_mapped_descendant(node)) {
      Bounds b{std::max(node.bounds->left, extent.left) - extent.left,
               std::max(node.bounds->top, extent.top) - extent.top,
               std::min(node.bounds->right, extent.right) - extent.left,
               std::min(node.bounds->bottom, extent.bottom) - extent.top};
      if (b.left < b.right && b.top < b.bottom) out.push_back({m.ctype, b});
    }
  }
  for (const auto& child : node.children) flatten(child, extent, out);
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Bounds parse_bounds(std::string_view text, std::string_view node_name) {
  auto fail = [&](const std::string& why) -> FieldError {
    return FieldError("node " + std::string(node_name) + ": bounds \"" +
                      std::string(text) + "\" " + why);
  };
  // "[l,t][r,b]"
  std::array<int, 4> v{};
  std::size_t pos = 0;
  for (int pair = 0; pair < 2; ++pair) {
    if (pos >= text.size() || text[pos] != '[') throw fail("is malformed");
    auto comma = text.find(',', pos);
    auto close = text.find(']', pos);
    if (comma == std::string_view::npos || close == std::string_view::npos || comma > close) {
      throw fail("is malformed");
    }
    if (!parse_int(text.substr(pos + 1, comma - pos - 1), v[2 * pair]) ||
        !parse_int(text.substr(comma + 1, close - comma - 1), v[2 * pair + 1])) {
      throw fail("is malformed");
    }
    pos = close + 1;
  }
  if (pos != text.size()) throw fail("is malformed");
  Bounds b{v[0], v[1], v[2], v[3]};
  if (b.left < 0 || b.top < 0) throw fail("has a negative coordinate");
  if (b.left >= b.right) throw fail("has left >= right");
  if (b.top >= b.bottom) throw fail("has top >= bottom");
  return b;
}

RawNode parse_dump(std::string_view document) {
  ParseState st;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error("cannot allocate XML parser");
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);

  const auto status = XML_Parse(parser.get(), document.data(),
                                static_cast<int>(document.size()), XML_TRUE);
  if (!st.pending_error.empty()) {
    throw FieldError(st.pending_error + " (at byte " + std::to_string(st.error_offset) + ")");
  }
  if (status != XML_STATUS_OK) {
    throw ParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())));
  }
  if (st.roots.empty()) throw ParseError("document contains no <node> element", 0);
  if (st.roots.size() == 1) return std::move(st.roots.front());

  RawNode root;
  root.class_name = "hierarchy";
  for (auto& r : st.roots) {
    if (!r.bounds) continue;
    if (!root.bounds) {
      root.bounds = r.bounds;
    } else {
      root.bounds->left = std::min(root.bounds->left, r.bounds->left);
      root.bounds->top = std::min(root.bounds->top, r.bounds->top);
      root.bounds->right = std::max(root.bounds->right, r.bounds->right);
      root.bounds->bottom = std::max(root.bounds->bottom, r.bounds->bottom);
    }
    if (root.package_name.empty()) root.package_name = r.package_name;
  }
  root.children = std::move(st.roots);
  return root;
}

ClassMapping map_class(std::string_view class_name) {
  const auto simple = simple_name(class_name);
  for (const auto& rule : name_rules()) {
    if (rule.name == simple) return rule.mapping;
  }
  return {};
}

ClassMapping resolve_class(std::string_view class_name) {
  auto m = map_class(class_name);
  if (m.kind != ClassMapKind::kUnknown) return m;
  const auto simple = simple_name(class_name);
  for (const auto& rule : name_rules()) {
    if (simple.size() > rule.name.size() && simple.ends_with(rule.name)) return rule.mapping;
  }
  return {};
}

UIScreen extract_screen(const RawNode& root, std::string id, const ScreenMetadata& metadata) {
  if (!root.bounds) throw FieldError("screen " + id + ": root node has no bounds");
  UIScreen s;
  s.id = std::move(id);
  s.width = root.bounds->width();
  s.height = root.bounds->height();
  s.app_id = metadata.app_id;
  if (!s.app_id && !root.package_name.empty()) s.app_id = root.package_name;
  s.category = metadata.category;
  flatten(root, *root.bounds, s.components);
  return s;
}

FilterVerdict filter_screen(const UIScreen& screen) {
  std::int64_t webview_area = 0;
  for (const auto& c : screen.components) {
    if (c.ctype == ComponentType::kWebView) webview_area += c.bounds.area();
  }
  const std::int64_t screen_area = static_cast<std::int64_t>(screen.width) * screen.height;
  if (2 * webview_area > screen_area) return FilterVerdict::kRejectWebView;
  if (static_cast<int>(screen.components.size()) < kMinMeaningfulComponents) {
    return FilterVerdict::kRejectTrivial;
  }
  return FilterVerdict::kKeep;
}

std::string IngestReport::to_json() const {
  return nlohmann::json{{"accepted", accepted},
                        {"rejected_webview", rejected_webview},
                        {"rejected_trivial", rejected_trivial},
                        {"rejected_duplicate", rejected_duplicate}}
      .dump();
}

DedupResult dedup(std::vector<UIScreen> screens) {
  DedupResult out;
  std::unordered_set<std::uint64_t> seen;
  for (auto& s : screens) {
    if (seen.insert(sequence_hash(s)).second) {
      out.unique.push_back(std::move(s));
      ++out.report.accepted;
    } else {
      ++out.report.rejected_duplicate;
    }
  }
  return out;
}

bool Ingestor::offer(UIScreen screen) {
  switch (filter_screen(screen)) {
    case FilterVerdict::kRejectWebView:
      ++report_.rejected_webview;
      return false;
    case FilterVerdict::kRejectTrivial:
      ++report_.rejected_trivial;
      return false;
    case FilterVerdict::kKeep:
      break;
  }
  if (!seen_.insert(sequence_hash(screen)).second) {
    ++report_.rejected_duplicate;
    return false;
  }
  accepted_.push_back(std::move(screen));
  ++report_.accepted;
  return true;
}

}  // namespace wae
