#pragma once

// Private helpers shared by the document loaders.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace skewprobe::detail {

// Parses a JSON document; syntax errors become ParseError with a line number.
nlohmann::json parse_json_document(std::string_view text, std::string_view what);

const nlohmann::json& require(const nlohmann::json& node, const char* key, const std::string& where);
std::string require_string(const nlohmann::json& node, const char* key, const std::string& where);

std::string read_text_file(const std::filesystem::path& path);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace skewprobe::detail
