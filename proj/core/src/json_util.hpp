#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "owdet/error.hpp"

namespace owdet::detail {

// Order-preserving variant keeps serialized output byte-stable.
using ojson = nlohmann::ordered_json;

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_json(const ojson& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

// Field access helpers that turn missing/mistyped fields into ParseError
// with the offending context named.
template <typename T>
T require_field(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key)) {
    throw ParseError(ctx + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const nlohmann::json& obj, const char* key, T fallback,
                 const std::string& ctx) {
  if (!obj.contains(key) || obj.at(key).is_null()) {
    return fallback;
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": field '" + key + "': " + e.what());
  }
}

}  // namespace owdet::detail
