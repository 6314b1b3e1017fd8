#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace skewprobe {

enum class Script { persian, latin };
enum class RejectReason { empty, multi_sentence, non_name, wrong_script };

std::string_view to_string(Script script);
std::string_view to_string(RejectReason reason);
std::optional<RejectReason> parse_reject_reason(std::string_view text);

struct NameCandidate {
  std::string raw;
  std::string language;
  // Empty exactly when rejected.
  std::string normalized;
  Script script = Script::latin;
  std::optional<RejectReason> rejected_reason;

  bool accepted() const { return !rejected_reason.has_value(); }
};

struct NameRules {
  std::size_t max_tokens = 3;
  // Honorific prefixes, compared case-insensitively for Latin and with any
  // trailing '.' ignored.
  std::vector<std::string> honorifics;
  // Multi-token given names kept whole by strip_surname.
  std::set<std::string> multi_token_allowlist;

  static std::vector<std::string> default_honorifics();
};

// Reads a one-entry-per-line list; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_list_file(const std::filesystem::path& path);

Script expected_script(std::string_view language);

NameCandidate extract_name(std::string_view raw, std::string_view language,
                           const NameRules& rules = {});
NameCandidate normalize_unicode(NameCandidate candidate);
NameCandidate strip_surname(NameCandidate candidate, const NameRules& rules = {});
NameCandidate validate_script(NameCandidate candidate, std::string_view language);

// NFC, Arabic->Persian letter unification, ZWNJ trimming at token boundaries.
std::string normalize_name_text(std::string_view text);

// extract -> normalize_unicode -> strip_surname -> validate_script.
class NamePipeline {
 public:
  NamePipeline() = default;
  explicit NamePipeline(NameRules rules);

  NameCandidate operator()(std::string_view raw, std::string_view language) const;
  const NameRules& rules() const { return rules_; }

 private:
  NameRules rules_;
};

}  // namespace skewprobe
