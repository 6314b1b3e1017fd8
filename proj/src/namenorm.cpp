#include "skewprobe/namenorm.hpp"

#include <algorithm>
#include <fstream>

#include "skewprobe/errors.hpp"
#include "skewprobe/unicode.hpp"

namespace skewprobe {

namespace u = unicode;

std::string_view to_string(Script script) {
  return script == Script::persian ? "persian" : "latin";
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::empty: return "empty";
    case RejectReason::multi_sentence: return "multi_sentence";
    case RejectReason::non_name: return "non_name";
    case RejectReason::wrong_script: return "wrong_script";
  }
  return "unknown";
}

std::optional<RejectReason> parse_reject_reason(std::string_view text) {
  for (auto r : {RejectReason::empty, RejectReason::multi_sentence, RejectReason::non_name,
                 RejectReason::wrong_script}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::vector<std::string> NameRules::default_honorifics() {
  return {"Mr", "Mrs", "Ms", "Miss", "Dr", "Prof", "Sir", "Lady",
          "آقای", "آقا", "خانم", "دکتر", "مهندس", "استاد"};
}

std::vector<std::string> load_list_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open list file '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t");
    out.push_back(normalize_name_text(line.substr(first, last - first + 1)));
  }
  return out;
}

Script expected_script(std::string_view language) {
  return language == "fa" ? Script::persian : Script::latin;
}

namespace {

bool is_wrapping_punctuation(char32_t c) {
  switch (c) {
    case U'.': case U',': case U'!': case U'?': case U';': case U':':
    case U'"': case U'\'': case U'`': case U'*': case U'_': case U'~':
    case U'(': case U')': case U'[': case U']': case U'{': case U'}': case U'<': case U'>':
    case U'«': case U'»': case U'“': case U'”': case U'‘': case U'’':
    case U'„': case U'‚': case U'‹': case U'›': case U'…':
    case U'،': case U'؛': case U'؟': case U'۔':
    case U'-': case U'–': case U'—':
      return true;
    default:
      return false;
  }
}

bool is_sentence_punctuation(char32_t c) {
  return c == U'.' || c == U'?' || c == U'!' || c == U'؟' || c == U'۔' || c == U'…';
}

bool is_trim_char(char32_t c) {
  return u::is_whitespace(c) || is_wrapping_punctuation(c) || c == u::kZwnj || c == U'﻿' ||
         c == U'‍' || c == U'‎' || c == U'‏';
}

std::u32string trim(std::u32string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && is_trim_char(s[begin])) ++begin;
  while (end > begin && is_trim_char(s[end - 1])) --end;
  return std::u32string(s.substr(begin, end - begin));
}

std::vector<std::u32string> split_tokens(std::u32string_view s) {
  std::vector<std::u32string> tokens;
  std::u32string current;
  for (char32_t c : s) {
    if (u::is_whitespace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::u32string join(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(U' ');
    out += tokens[i];
  }
  return out;
}

bool is_honorific(std::u32string_view token, const std::vector<std::u32string>& honorifics) {
  std::u32string bare(token);
  while (!bare.empty() && bare.back() == U'.') bare.pop_back();
  const std::string lowered = u::ascii_lower(u::encode(bare));
  for (const auto& h : honorifics) {
    if (u::ascii_lower(u::encode(h)) == lowered) return true;
  }
  return false;
}

// Arabic-script code points that are not part of a name.
bool is_arabic_non_letter(char32_t c) {
  return (c >= 0x0660 && c <= 0x066D) || (c >= 0x06F0 && c <= 0x06F9) || c == 0x060C ||
         c == 0x061B || c == 0x061F || c == 0x06D4 || c == 0x06DD || c == 0x06DE || c == 0x06E9 ||
         (c >= 0x0600 && c <= 0x0605) || c == 0x0609 || c == 0x060A || c == 0x060D || c == 0x060E ||
         c == 0x060F;
}

bool is_latin_joiner(char32_t c) {
  return c == U'\'' || c == U'’' || c == U'-';
}

std::optional<RejectReason> classify_characters(std::u32string_view text, Script expected) {
  bool saw_other_script_letter = false;
  bool saw_non_name = false;
  for (char32_t c : text) {
    if (c == U' ') continue;
    if (expected == Script::persian) {
      if (c == u::kZwnj) continue;
      if (u::is_arabic_script(c) && !is_arabic_non_letter(c)) continue;
      if (u::is_latin_letter(c)) {
        saw_other_script_letter = true;
      } else {
        saw_non_name = true;
      }
    } else {
      if (u::is_latin_letter(c) || is_latin_joiner(c)) continue;
      if (c >= 0x0300 && c <= 0x036F) continue;
      if (u::is_arabic_script(c) && !is_arabic_non_letter(c)) {
        saw_other_script_letter = true;
      } else {
        saw_non_name = true;
      }
    }
  }
  if (saw_other_script_letter) return RejectReason::wrong_script;
  if (saw_non_name) return RejectReason::non_name;
  return std::nullopt;
}

Script detect_script(std::u32string_view text, Script fallback) {
  for (char32_t c : text) {
    if (u::is_arabic_script(c)) return Script::persian;
    if (u::is_latin_letter(c)) return Script::latin;
  }
  return fallback;
}

NameCandidate reject(NameCandidate c, RejectReason reason) {
  c.normalized.clear();
  c.rejected_reason = reason;
  return c;
}

}  // namespace

NameCandidate extract_name(std::string_view raw, std::string_view language, const NameRules& rules) {
  NameCandidate candidate;
  candidate.raw = std::string(raw);
  candidate.language = std::string(language);
  const Script expected = expected_script(language);
  candidate.script = expected;

  const std::u32string trimmed = trim(u::decode(raw));
  if (trimmed.empty()) return reject(std::move(candidate), RejectReason::empty);

  // Line breaks inside the answer mean the model wrote more than a name.
  if (std::any_of(trimmed.begin(), trimmed.end(), [](char32_t c) { return c == U'\n' || c == U'\r'; }))
    return reject(std::move(candidate), RejectReason::multi_sentence);

  std::vector<std::u32string> honorifics;
  for (const auto& h : rules.honorifics) honorifics.push_back(u::decode(h));
  std::vector<std::u32string> tokens = split_tokens(trimmed);
  while (!tokens.empty() && is_honorific(tokens.front(), honorifics)) tokens.erase(tokens.begin());

  const std::u32string body = trim(join(tokens));
  tokens = split_tokens(body);
  if (body.empty()) return reject(std::move(candidate), RejectReason::empty);
  candidate.script = detect_script(body, expected);

  if (std::any_of(body.begin(), body.end(), is_sentence_punctuation))
    return reject(std::move(candidate), RejectReason::multi_sentence);
  if (tokens.size() > rules.max_tokens) return reject(std::move(candidate), RejectReason::non_name);
  if (auto reason = classify_characters(body, expected)) return reject(std::move(candidate), *reason);

  candidate.normalized = u::encode(body);
  return candidate;
}

std::string normalize_name_text(std::string_view text) {
  std::u32string s = u::decode(u::nfc(text));
  for (char32_t& c : s) {
    if (c == 0x064A) c = 0x06CC;       // Arabic yeh -> Persian yeh
    else if (c == 0x0643) c = 0x06A9;  // Arabic kaf -> Persian keheh
  }
  // Collapse whitespace and drop ZWNJ at token boundaries.
  std::vector<std::u32string> tokens = split_tokens(s);
  for (auto& token : tokens) {
    std::size_t b = 0, e = token.size();
    while (b < e && token[b] == u::kZwnj) ++b;
    while (e > b && token[e - 1] == u::kZwnj) --e;
    token = token.substr(b, e - b);
  }
  std::erase_if(tokens, [](const std::u32string& t) { return t.empty(); });
  return u::encode(join(tokens));
}

NameCandidate normalize_unicode(NameCandidate candidate) {
  if (!candidate.accepted()) return candidate;
  candidate.normalized = normalize_name_text(candidate.normalized);
  if (candidate.normalized.empty()) return reject(std::move(candidate), RejectReason::empty);
  return candidate;
}

NameCandidate strip_surname(NameCandidate candidate, const NameRules& rules) {
  if (!candidate.accepted()) return candidate;
  const auto tokens = split_tokens(u::decode(candidate.normalized));
  if (tokens.size() <= 1) return candidate;
  if (rules.multi_token_allowlist.contains(candidate.normalized)) return candidate;
  candidate.normalized = u::encode(trim(tokens.front()));
  if (candidate.normalized.empty()) return reject(std::move(candidate), RejectReason::empty);
  return candidate;
}

NameCandidate validate_script(NameCandidate candidate, std::string_view language) {
  if (!candidate.accepted()) return candidate;
  const std::u32string text = u::decode(candidate.normalized);
  if (text.empty()) return reject(std::move(candidate), RejectReason::empty);
  const Script expected = expected_script(language);
  candidate.script = detect_script(text, expected);
  if (auto reason = classify_characters(text, expected)) return reject(std::move(candidate), *reason);
  // A name needs at least one letter; a bare apostrophe or hyphen is not one.
  const bool has_letter = std::any_of(text.begin(), text.end(), [&](char32_t c) {
    return expected == Script::persian ? (u::is_arabic_script(c) && !u::is_combining_mark(c))
                                       : u::is_latin_letter(c);
  });
  if (!has_letter) return reject(std::move(candidate), RejectReason::non_name);
  return candidate;
}

NamePipeline::NamePipeline(NameRules rules) : rules_(std::move(rules)) {
  std::set<std::string> normalized;
  for (const auto& entry : rules_.multi_token_allowlist) normalized.insert(normalize_name_text(entry));
  rules_.multi_token_allowlist = std::move(normalized);
}

NameCandidate NamePipeline::operator()(std::string_view raw, std::string_view language) const {
  auto candidate = extract_name(raw, language, rules_);
  candidate = normalize_unicode(std::move(candidate));
  candidate = strip_surname(std::move(candidate), rules_);
  return validate_script(std::move(candidate), language);
}

}  // namespace skewprobe
