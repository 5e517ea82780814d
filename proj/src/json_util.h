// Schema-checked accessors over nlohmann::json. Every failure carries the
// JSON pointer of the offending field.

#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "melcomp/error.h"
#include "melcomp/rational_time.h"

namespace melcomp::json_util {

using nlohmann::json;

inline std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
inline std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

inline const json& field(const json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected object");
  auto it = j.find(std::string(key));
  if (it == j.end()) throw SchemaError(child(path, key), "missing field");
  return *it;
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected array");
  return j;
}

inline std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected integer");
  return j.get<std::int64_t>();
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected number");
  return j.get<double>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected boolean");
  return j.get<bool>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected string");
  return j.get<std::string>();
}

inline RationalTime rational(const json& j, const std::string& path) {
  try {
    return RationalTime::parse(string(j, path));
  } catch (const ParseError& e) {
    throw SchemaError(path, e.what());
  }
}

inline json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace melcomp::json_util
