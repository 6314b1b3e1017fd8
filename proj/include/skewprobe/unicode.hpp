#pragma once

#include <string>
#include <string_view>

namespace skewprobe::unicode {

inline constexpr char32_t kZwnj = U'‌';

// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);

// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

bool is_whitespace(char32_t c);
bool is_arabic_script(char32_t c);
bool is_latin_letter(char32_t c);
bool is_combining_mark(char32_t c);

// Lowercases ASCII letters only.
std::string ascii_lower(std::string_view text);

}  // namespace skewprobe::unicode
