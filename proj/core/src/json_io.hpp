// Internal nlohmann::json bindings for the domain types.
#pragma once

#include <string>

#include "json.hpp"
#include "wae/ui_model.hpp"

namespace wae::detail {

nlohmann::json bounds_to_json(const Bounds& b);
Bounds bounds_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json component_to_json(const UIComponent& c);
UIComponent component_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json screen_to_json(const UIScreen& s);
UIScreen screen_from_json(const nlohmann::json& j);

}  // namespace wae::detail
