#include "skewprobe/prompting.hpp"

#include <set>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"

namespace skewprobe {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void replace_once(std::string& text, std::string_view token, std::string_view value) {
  const auto pos = text.find(token);
  if (pos != std::string::npos) text.replace(pos, token.size(), value);
}

std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\n' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

void PromptTemplate::validate() const {
  const std::string where =
      "template (" + std::string(to_string(domain)) + ", " + language + ")";
  if (language.empty()) throw ValidationError(where + ": empty language");
  if (trim_ascii(instruction).empty()) throw ValidationError(where + ": empty instruction");
  const auto labels = count_occurrences(sentence_pattern, kLabelPlaceholder);
  if (labels != 1)
    throw ValidationError(where + ": sentence_pattern must contain {label} exactly once, found " +
                          std::to_string(labels));
  if (count_occurrences(sentence_pattern, kArticlePlaceholder) > 1)
    throw ValidationError(where + ": {article} may appear at most once");
  for (auto marker : {kSentenceOpen, kSentenceClose}) {
    if (count_occurrences(instruction, marker) + count_occurrences(sentence_pattern, marker) > 0)
      throw ValidationError(where + ": sentence markers are added at render time");
  }
}

TemplateSet TemplateSet::parse(std::string_view json_text) {
  const auto doc = detail::parse_json_document(json_text, "templates");
  const nlohmann::json* entries = &doc;
  if (doc.is_object()) entries = &detail::require(doc, "templates", "templates");
  if (!entries->is_array()) throw ParseError("templates: expected an array of templates");
  if (entries->empty()) throw ValidationError("templates: document contains no templates");

  TemplateSet set;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string where = "templates[" + std::to_string(i) + "]";
    const auto& node = (*entries)[i];
    PromptTemplate tmpl;
    try {
      tmpl.domain = parse_domain_id(detail::require_string(node, "domain", where));
    } catch (const UsageError& e) {
      throw ValidationError(where + ".domain: " + e.what());
    }
    tmpl.language = detail::require_string(node, "language", where);
    tmpl.instruction = detail::require_string(node, "instruction", where);
    tmpl.sentence_pattern = detail::require_string(node, "sentence_pattern", where);
    set.add(std::move(tmpl));
  }
  return set;
}

TemplateSet TemplateSet::load_file(const std::filesystem::path& path) {
  return parse(detail::read_text_file(path));
}

void TemplateSet::add(PromptTemplate tmpl) {
  tmpl.validate();
  if (find(tmpl.domain, tmpl.language))
    throw ValidationError("duplicate template for (" + std::string(to_string(tmpl.domain)) + ", " +
                          tmpl.language + ")");
  templates_.push_back(std::move(tmpl));
}

const PromptTemplate* TemplateSet::find(DomainId domain, std::string_view language) const {
  for (const auto& t : templates_) {
    if (t.domain == domain && t.language == language) return &t;
  }
  return nullptr;
}

std::string_view RenderedPrompt::sentence() const {
  std::string_view view = text;
  const auto open = view.find(kSentenceOpen);
  const auto close = view.find(kSentenceClose);
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return {};
  const auto begin = open + kSentenceOpen.size();
  return trim_ascii(view.substr(begin, close - begin));
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Category& category,
                             const DomainCatalog& catalog) {
  tmpl.validate();
  if (category.domain != tmpl.domain)
    throw ValidationError("category '" + category.id + "' belongs to " +
                          std::string(to_string(category.domain)) + ", template is for " +
                          std::string(to_string(tmpl.domain)));
  if (!catalog.has_language(tmpl.language))
    throw ValidationError("language '" + tmpl.language + "' not configured in catalog");

  std::string sentence = tmpl.sentence_pattern;
  if (sentence.find(kArticlePlaceholder) != std::string::npos) {
    auto it = category.articles.find(tmpl.language);
    replace_once(sentence, kArticlePlaceholder, it != category.articles.end() ? it->second : "a");
  }
  replace_once(sentence, kLabelPlaceholder, label_of(category, tmpl.language));

  RenderedPrompt prompt;
  prompt.text.reserve(tmpl.instruction.size() + sentence.size() + 32);
  prompt.text.append(trim_ascii(tmpl.instruction));
  prompt.text.append(" ").append(kSentenceOpen).append(" ");
  prompt.text.append(sentence);
  prompt.text.append(" ").append(kSentenceClose);
  prompt.language = tmpl.language;
  prompt.domain = tmpl.domain;
  prompt.category_id = category.id;
  return prompt;
}

std::string TaskKey::to_string() const {
  return model_id + "/" + language + "/" + std::string(skewprobe::to_string(domain)) + "/" +
         category_id + "/" + std::to_string(trial_index);
}

nlohmann::json to_json(const TaskKey& key) {
  return {{"model_id", key.model_id},
          {"language", key.language},
          {"domain", std::string(to_string(key.domain))},
          {"category_id", key.category_id},
          {"trial_index", key.trial_index}};
}

TaskKey task_key_from_json(const nlohmann::json& node) {
  const std::string where = "task_key";
  TaskKey key;
  key.model_id = detail::require_string(node, "model_id", where);
  key.language = detail::require_string(node, "language", where);
  try {
    key.domain = parse_domain_id(detail::require_string(node, "domain", where));
  } catch (const UsageError& e) {
    throw ParseError(where + ".domain: " + e.what());
  }
  key.category_id = detail::require_string(node, "category_id", where);
  const auto& trial = detail::require(node, "trial_index", where);
  if (!trial.is_number_integer()) throw ParseError(where + ".trial_index: expected an integer");
  key.trial_index = trial.get<int>();
  return key;
}

std::vector<ProbeTask> enumerate_probes(const PlanSpec& spec, const DomainCatalog& catalog,
                                        const TemplateSet& templates) {
  if (spec.trials_per_category < 1)
    throw ValidationError("trials_per_category must be >= 1, got " +
                          std::to_string(spec.trials_per_category));
  if (spec.model_ids.empty()) throw ValidationError("plan has no models");
  if (spec.languages.empty()) throw ValidationError("plan has no languages");
  std::set<std::string> unique_models(spec.model_ids.begin(), spec.model_ids.end());
  if (unique_models.size() != spec.model_ids.size())
    throw ValidationError("model ids must be unique within a run");

  // Render each (language, category) prompt once.
  std::vector<std::vector<std::shared_ptr<const RenderedPrompt>>> rendered;
  for (const auto& language : spec.languages) {
    auto& row = rendered.emplace_back();
    for (const auto& domain : catalog.domains()) {
      const PromptTemplate* tmpl = templates.find(domain.id, language);
      if (!tmpl)
        throw ValidationError("missing template for (" + std::string(to_string(domain.id)) + ", " +
                              language + ")");
      for (const Category* category : catalog.categories_of(domain.id))
        row.push_back(std::make_shared<const RenderedPrompt>(render_prompt(*tmpl, *category, catalog)));
    }
  }

  const auto trials = static_cast<std::size_t>(spec.trials_per_category);
  std::vector<ProbeTask> plan;
  plan.reserve(spec.model_ids.size() * spec.languages.size() * catalog.categories().size() * trials);
  for (const auto& model : spec.model_ids) {
    for (std::size_t l = 0; l < spec.languages.size(); ++l) {
      for (const auto& prompt : rendered[l]) {
        for (int trial = 0; trial < spec.trials_per_category; ++trial) {
          plan.push_back({TaskKey{model, spec.languages[l], prompt->domain, prompt->category_id, trial},
                          prompt});
        }
      }
    }
  }
  return plan;
}

}  // namespace skewprobe
