#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ecoplatoon/common.hpp"

namespace ecoplatoon::detail {

inline int LineOfOffset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Line of the first occurrence of "key" in the raw text, 0 if not found.
inline int LineOfKey(std::string_view text, std::string_view key) {
  std::string quoted = "\"" + std::string(key) + "\"";
  auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : LineOfOffset(text, pos);
}

inline nlohmann::json ParseJson(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::ostringstream msg;
    msg << what << ": line " << LineOfOffset(text, e.byte == 0 ? 0 : e.byte - 1)
        << ": malformed JSON (" << e.what() << ")";
    throw ConfigError(msg.str());
  }
}

inline std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ecoplatoon::detail
