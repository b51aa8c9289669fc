#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hftp/error.hpp"

namespace hftp {

/// Rejects any key of `j` not in `allowed`. `context` names the object in the
/// error message.
inline void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                               std::string_view context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(context));
  }
}

template <class T>
T json_get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace hftp
