#include "json_support.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skewprobe/errors.hpp"

namespace skewprobe::detail {

nlohmann::json parse_json_document(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw ParseError(std::string(what) + ": line " + std::to_string(line) + ": " + e.what());
  }
}

const nlohmann::json& require(const nlohmann::json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key))
    throw ParseError(where + "." + key + ": missing required field");
  return node[key];
}

std::string require_string(const nlohmann::json& node, const char* key, const std::string& where) {
  const auto& value = require(node, key, where);
  if (!value.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return value.get<std::string>();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace skewprobe::detail
