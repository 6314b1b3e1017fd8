#include "skewprobe/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"

namespace skewprobe {

using nlohmann::json;

std::string_view to_string(DomainId id) {
  switch (id) {
    case DomainId::academic_discipline: return "academic_discipline";
    case DomainId::profession: return "profession";
    case DomainId::color: return "color";
    case DomainId::sport: return "sport";
  }
  return "unknown";
}

DomainId parse_domain_id(std::string_view text) {
  for (DomainId id : kAllDomains) {
    if (to_string(id) == text) return id;
  }
  throw UsageError("unknown domain id '" + std::string(text) + "'");
}

std::size_t expected_category_count(DomainId id) {
  return id == DomainId::academic_discipline ? 66 : 10;
}

namespace {

LabelMap read_label_map(const json& node, const std::string& where) {
  if (!node.is_object()) throw ParseError(where + ": expected an object of language -> string");
  LabelMap out;
  for (const auto& [key, value] : node.items()) {
    if (!value.is_string()) throw ParseError(where + "." + key + ": expected a string");
    out.emplace(key, value.get<std::string>());
  }
  return out;
}

}  // namespace

DomainCatalog DomainCatalog::parse(std::string_view json_text) {
  const json doc = detail::parse_json_document(json_text, "catalog");
  if (!doc.is_object()) throw ParseError("catalog: top level must be an object");

  DomainCatalog catalog;
  catalog.version_ = doc.value("version", std::string{});

  const json& languages = detail::require(doc, "languages", "catalog");
  if (!languages.is_array() || languages.empty())
    throw ParseError("catalog.languages: expected a non-empty array");
  for (const auto& lang : languages) {
    if (!lang.is_string()) throw ParseError("catalog.languages: entries must be strings");
    catalog.languages_.push_back(lang.get<std::string>());
  }

  const json& domains = detail::require(doc, "domains", "catalog");
  if (!domains.is_array()) throw ParseError("catalog.domains: expected an array");
  std::set<DomainId> seen_domains;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const std::string where = "catalog.domains[" + std::to_string(i) + "]";
    const auto& node = domains[i];
    Domain domain{};
    try {
      domain.id = parse_domain_id(detail::require_string(node, "id", where));
    } catch (const UsageError& e) {
      throw ValidationError(where + ".id: " + e.what());
    }
    if (!seen_domains.insert(domain.id).second)
      throw ValidationError(where + ": duplicate domain '" + std::string(to_string(domain.id)) + "'");
    if (node.contains("display_names"))
      domain.display_names = read_label_map(node["display_names"], where + ".display_names");
    catalog.domains_.push_back(std::move(domain));
  }
  if (catalog.domains_.size() != kAllDomains.size()) {
    throw ValidationError("catalog.domains: expected " + std::to_string(kAllDomains.size()) +
                          ", found " + std::to_string(catalog.domains_.size()));
  }

  std::map<std::string, LabelMap> group_labels;
  if (doc.contains("groups")) {
    for (std::size_t i = 0; i < doc["groups"].size(); ++i) {
      const std::string where = "catalog.groups[" + std::to_string(i) + "]";
      const auto& node = doc["groups"][i];
      group_labels[detail::require_string(node, "id", where)] =
          node.contains("labels") ? read_label_map(node["labels"], where + ".labels") : LabelMap{};
    }
  }

  const json& categories = detail::require(doc, "categories", "catalog");
  if (!categories.is_array()) throw ParseError("catalog.categories: expected an array");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string where = "catalog.categories[" + std::to_string(i) + "]";
    const auto& node = categories[i];
    Category category;
    category.id = detail::require_string(node, "id", where);
    try {
      category.domain = parse_domain_id(detail::require_string(node, "domain", where));
    } catch (const UsageError& e) {
      throw ValidationError(where + ".domain: " + e.what());
    }
    category.labels = read_label_map(detail::require(node, "labels", where), where + ".labels");
    if (node.contains("group") && !node["group"].is_null()) {
      if (!node["group"].is_string()) throw ParseError(where + ".group: expected a string");
      category.group = node["group"].get<std::string>();
    }
    if (node.contains("articles"))
      category.articles = read_label_map(node["articles"], where + ".articles");
    category.editorial = node.value("editorial", false);

    if (catalog.index_.contains(category.id))
      throw ValidationError("duplicate category id '" + category.id + "'");
    for (const auto& lang : catalog.languages_) {
      auto it = category.labels.find(lang);
      if (it == category.labels.end() || it->second.empty())
        throw ValidationError("category '" + category.id + "': missing label for language '" + lang + "'");
    }
    const bool academic = category.domain == DomainId::academic_discipline;
    if (academic && (!category.group || category.group->empty()))
      throw ValidationError("category '" + category.id + "': academic fields require a group");
    if (!academic && category.group)
      throw ValidationError("category '" + category.id + "': only academic fields carry a group");

    if (academic) {
      const bool known = std::any_of(catalog.groups_.begin(), catalog.groups_.end(),
                                     [&](const CategoryGroup& g) { return g.id == *category.group; });
      if (!known) {
        auto labels = group_labels.find(*category.group);
        catalog.groups_.push_back(
            {*category.group, labels != group_labels.end() ? labels->second : LabelMap{}});
      }
    }
    catalog.index_.emplace(category.id, catalog.categories_.size());
    catalog.categories_.push_back(std::move(category));
  }

  std::ostringstream violations;
  for (DomainId id : kAllDomains) {
    const auto found = catalog.categories_of(id).size();
    const auto expected = expected_category_count(id);
    if (found != expected) {
      if (violations.tellp() > 0) violations << "; ";
      violations << to_string(id) << ": expected " << expected << ", found " << found;
    }
  }
  if (catalog.groups_.size() != kAcademicGroupCount) {
    if (violations.tellp() > 0) violations << "; ";
    violations << "academic groups: expected " << kAcademicGroupCount << ", found "
               << catalog.groups_.size();
  }
  if (violations.tellp() > 0) throw ValidationError(violations.str());
  return catalog;
}

DomainCatalog DomainCatalog::load_file(const std::filesystem::path& path) {
  return parse(detail::read_text_file(path));
}

bool DomainCatalog::has_language(std::string_view language) const {
  return std::find(languages_.begin(), languages_.end(), language) != languages_.end();
}

const Domain& DomainCatalog::domain(DomainId id) const {
  for (const auto& d : domains_) {
    if (d.id == id) return d;
  }
  throw UsageError("domain not in catalog: " + std::string(to_string(id)));
}

std::vector<const Category*> DomainCatalog::categories_of(DomainId id) const {
  std::vector<const Category*> out;
  out.reserve(expected_category_count(id));
  for (const auto& c : categories_) {
    if (c.domain == id) out.push_back(&c);
  }
  return out;
}

std::vector<const Category*> DomainCatalog::categories_of(std::string_view domain_id) const {
  return categories_of(parse_domain_id(domain_id));
}

const Category* DomainCatalog::find(std::string_view category_id) const {
  auto it = index_.find(category_id);
  return it == index_.end() ? nullptr : &categories_[it->second];
}

const Category& DomainCatalog::category(std::string_view category_id) const {
  if (const Category* c = find(category_id)) return *c;
  throw UsageError("unknown category id '" + std::string(category_id) + "'");
}

const std::string& label_of(const Category& category, std::string_view language) {
  auto it = category.labels.find(std::string(language));
  if (it == category.labels.end())
    throw ValidationError("language '" + std::string(language) + "' not configured for category '" +
                          category.id + "'");
  return it->second;
}

}  // namespace skewprobe
