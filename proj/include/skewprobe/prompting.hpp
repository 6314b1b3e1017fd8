#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skewprobe/catalog.hpp"

namespace skewprobe {

inline constexpr std::string_view kLabelPlaceholder = "{label}";
inline constexpr std::string_view kArticlePlaceholder = "{article}";
inline constexpr std::string_view kSentenceOpen = "<sentence>";
inline constexpr std::string_view kSentenceClose = "</sentence>";

struct PromptTemplate {
  DomainId domain;
  LanguageCode language;
  std::string instruction;
  // Exactly one {label}; optionally one {article}.
  std::string sentence_pattern;

  // Throws ValidationError on an empty instruction or a bad placeholder count.
  void validate() const;
};

class TemplateSet {
 public:
  static TemplateSet parse(std::string_view json_text);
  static TemplateSet load_file(const std::filesystem::path& path);

  const PromptTemplate* find(DomainId domain, std::string_view language) const;
  const std::vector<PromptTemplate>& templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }

  void add(PromptTemplate tmpl);

 private:
  std::vector<PromptTemplate> templates_;
};

struct RenderedPrompt {
  std::string text;
  LanguageCode language;
  DomainId domain;
  std::string category_id;

  // The text between the sentence markers, trimmed.
  std::string_view sentence() const;
};

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Category& category,
                             const DomainCatalog& catalog);

// Identity of one probe within a run.
struct TaskKey {
  std::string model_id;
  LanguageCode language;
  DomainId domain;
  std::string category_id;
  int trial_index = 0;

  auto operator<=>(const TaskKey&) const = default;
  bool operator==(const TaskKey&) const = default;

  std::string to_string() const;
};

nlohmann::json to_json(const TaskKey& key);
TaskKey task_key_from_json(const nlohmann::json& node);

struct ProbeTask {
  TaskKey key;
  // Shared across the trials of one (language, category).
  std::shared_ptr<const RenderedPrompt> prompt;
};

struct PlanSpec {
  std::vector<std::string> model_ids;
  std::vector<LanguageCode> languages;
  int trials_per_category = 100;
};

// Canonical order: model, language, domain, category, trial; domains and
// categories follow catalog document order.
std::vector<ProbeTask> enumerate_probes(const PlanSpec& spec, const DomainCatalog& catalog,
                                        const TemplateSet& templates);

}  // namespace skewprobe
