#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ecofair/error.hpp"

namespace ecofair::detail {

inline void require_object(const nlohmann::json& j, std::string_view ctx) {
  if (!j.is_object()) throw InvalidConfig(std::string(ctx) + " must be an object");
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                                std::string_view ctx) {
  require_object(j, ctx);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidConfig("unknown key '" + key + "' in " + std::string(ctx));
    }
  }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("key '") + key + "': " + e.what());
  }
}

template <class T>
T get_required(const nlohmann::json& j, const char* key, std::string_view ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidConfig("missing key '" + std::string(key) + "' in " + std::string(ctx));
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("key '") + key + "': " + e.what());
  }
}

}  // namespace ecofair::detail
