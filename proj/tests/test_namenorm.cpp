#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewprobe/namenorm.hpp"
#include "test_support.hpp"

using namespace skewprobe;

namespace {

const NamePipeline& pipeline() {
  static const NamePipeline p = [] {
    NameRules rules;
    rules.honorifics = load_list_file(testing::data_dir() / "honorifics.txt");
    for (auto& n : load_list_file(testing::data_dir() / "allowlist.txt")) rules.multi_token_allowlist.insert(n);
    return NamePipeline(rules);
  }();
  return p;
}

std::optional<RejectReason> reason(std::string_view raw, std::string_view lang) {
  return pipeline()(raw, lang).rejected_reason;
}

std::string accepted(std::string_view raw, std::string_view lang) {
  const auto c = pipeline()(raw, lang);
  REQUIRE_MESSAGE(c.accepted(), "rejected: " << std::string(raw));
  return c.normalized;
}

}  // namespace

TEST_CASE("extract_name examples") {
  CHECK(accepted("علیرضا", "fa") == "علیرضا");
  CHECK(reason("Sure! A great name would be Emily.", "en") == RejectReason::multi_sentence);
  CHECK(reason("", "fa") == RejectReason::empty);
  CHECK(reason("   \n ", "en") == RejectReason::empty);
  CHECK(reason("\"...\"", "en") == RejectReason::empty);
}

TEST_CASE("surrounding punctuation and quotes") {
  CHECK(accepted("\"Emily\"", "en") == "Emily");
  CHECK(accepted("  Emily.  ", "en") == "Emily");
  CHECK(accepted("«نگین»", "fa") == "نگین");
  CHECK(accepted("نگین؟", "fa") == "نگین");
  CHECK(accepted("**Elsa**", "en") == "Elsa");
}

TEST_CASE("sentences and long answers are rejected") {
  CHECK(reason("Emily. She is kind.", "en") == RejectReason::multi_sentence);
  CHECK(reason("Emily\nJohnson", "en") == RejectReason::multi_sentence);
  CHECK(reason("سارا. او دوست خوبی است.", "fa") == RejectReason::multi_sentence);
  CHECK(reason("I would suggest Emily", "en") == RejectReason::non_name);
  CHECK(reason("متأسفم، نمی‌توانم نامی حدس بزنم", "fa") == RejectReason::non_name);
  CHECK(reason("Emily Rose Anne Smith", "en") == RejectReason::non_name);
}

TEST_CASE("honorifics are dropped before the token count") {
  CHECK(accepted("Dr. Emily Johnson", "en") == "Emily");
  CHECK(accepted("mrs emily", "en") == "emily");
  CHECK(accepted("خانم سارا", "fa") == "سارا");
  CHECK(accepted("Prof. Mary Jane Watson", "en") == "Mary");
  CHECK(reason("Dr.", "en") == RejectReason::empty);
}

TEST_CASE("strip_surname") {
  CHECK(accepted("Emily Johnson", "en") == "Emily");
  CHECK(accepted("علیرضا", "fa") == "علیرضا");
  CHECK(accepted("Mary Jane", "en") == "Mary Jane");
  CHECK(accepted("امیر حسین", "fa") == "امیر حسین");
  CHECK(accepted("علی احمدی", "fa") == "علی");

  NameRules rules;
  rules.multi_token_allowlist = {"Mary Jane"};
  NameCandidate c;
  c.raw = "Mary Jane";
  c.language = "en";
  c.normalized = "Mary Jane";
  CHECK(strip_surname(c, rules).normalized == "Mary Jane");
  c.normalized = "Mary Smith";
  const auto once = strip_surname(c, rules);
  CHECK(once.normalized == "Mary");
  CHECK(strip_surname(once, rules).normalized == once.normalized);
}

TEST_CASE("normalize_unicode") {
  CHECK(normalize_name_text("علي") == "علی");
  CHECK(normalize_name_text("كيان") == "کیان");
  CHECK(normalize_name_text("Emily") == "Emily");
  CHECK(normalize_name_text("نگین\u200c") == "نگین");
  CHECK(normalize_name_text("\u200cنگین") == "نگین");
  // interior ZWNJ is part of the spelling
  CHECK(normalize_name_text("مه\u200cلقا") == "مه\u200cلقا");
  // decomposed e + acute composes
  CHECK(normalize_name_text("Zoe\xCC\x81") == "Zo\xC3\xA9");
  CHECK(accepted("علي", "fa") == "علی");
  for (std::string s : {"علي", "Zoe\xCC\x81", "نگین\u200c", "  Mary  "}) {
    const auto once = normalize_name_text(s);
    CHECK(normalize_name_text(once) == once);
  }
}

TEST_CASE("validate_script") {
  CHECK(reason("Emily", "fa") == RejectReason::wrong_script);
  CHECK(reason("سارا", "en") == RejectReason::wrong_script);
  CHECK(reason("Sara سارا", "fa") == RejectReason::wrong_script);
  CHECK(accepted("نگین", "fa") == "نگین");
  CHECK(accepted("Elsa", "en") == "Elsa");
  CHECK(accepted("Zoë", "en") == "Zoë");
  CHECK(accepted("O'Brien", "en") == "O'Brien");
  CHECK(reason("12345", "en").has_value());
}

TEST_CASE("accepted names satisfy the candidate invariants") {
  for (std::string raw : {"Emily", "\"Anna\"", "Dr. Emily Johnson", "Emily.", "خانم سارا", "«نگین»", "علي",
                          "Sure! Emily.", "", "I really do not know", "Sara", "🙂"}) {
    for (const char* lang : {"fa", "en"}) {
      const auto c = pipeline()(raw, lang);
      CHECK(c.normalized.empty() == !c.accepted());
      if (c.accepted()) {
        CHECK(c.normalized == normalize_name_text(c.normalized));
        CHECK(!std::isspace(static_cast<unsigned char>(c.normalized.front())));
        CHECK(!std::isspace(static_cast<unsigned char>(c.normalized.back())));
        CHECK(!std::ispunct(static_cast<unsigned char>(c.normalized.back())));
        // running the result through again changes nothing
        CHECK(pipeline()(c.normalized, lang).normalized == c.normalized);
      }
    }
  }
}

TEST_CASE("reject reasons round trip") {
  for (auto r : {RejectReason::empty, RejectReason::multi_sentence, RejectReason::non_name,
                 RejectReason::wrong_script})
    CHECK(parse_reject_reason(to_string(r)) == r);
}
