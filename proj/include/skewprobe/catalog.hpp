#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skewprobe {

enum class DomainId { academic_discipline, profession, color, sport };

inline constexpr std::array<DomainId, 4> kAllDomains = {
    DomainId::academic_discipline, DomainId::profession, DomainId::color, DomainId::sport};

std::string_view to_string(DomainId id);
// Throws UsageError for anything outside the four known ids.
DomainId parse_domain_id(std::string_view text);

// Fixed number of categories each domain must carry.
std::size_t expected_category_count(DomainId id);
inline constexpr std::size_t kAcademicGroupCount = 10;

using LanguageCode = std::string;
using LabelMap = std::map<LanguageCode, std::string>;

struct Domain {
  DomainId id;
  LabelMap display_names;
};

struct Category {
  std::string id;
  DomainId domain;
  LabelMap labels;
  // Major discipline; present only for academic fields.
  std::optional<std::string> group;
  // Indefinite article per language, used by templates with an {article} token.
  LabelMap articles;
  bool editorial = false;

  bool operator==(const Category&) const = default;
};

struct CategoryGroup {
  std::string id;
  LabelMap labels;
};

// Immutable after load.
class DomainCatalog {
 public:
  static DomainCatalog parse(std::string_view json_text);
  static DomainCatalog load_file(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  const std::vector<LanguageCode>& languages() const { return languages_; }
  bool has_language(std::string_view language) const;

  std::span<const Domain> domains() const { return domains_; }
  std::span<const Category> categories() const { return categories_; }
  const Domain& domain(DomainId id) const;

  // Categories of one domain in document order.
  std::vector<const Category*> categories_of(DomainId id) const;
  std::vector<const Category*> categories_of(std::string_view domain_id) const;

  const Category* find(std::string_view category_id) const;
  const Category& category(std::string_view category_id) const;

  // Academic groups in first-appearance order, with optional localized labels.
  const std::vector<CategoryGroup>& groups() const { return groups_; }

 private:
  std::string version_;
  std::vector<LanguageCode> languages_;
  std::vector<Domain> domains_;
  std::vector<Category> categories_;
  std::vector<CategoryGroup> groups_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Throws ValidationError when the language has no label for this category.
const std::string& label_of(const Category& category, std::string_view language);

}  // namespace skewprobe
