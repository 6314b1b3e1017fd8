#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewprobe/catalog.hpp"
#include "skewprobe/genderres.hpp"
#include "skewprobe/prompting.hpp"
#include "skewprobe/provider.hpp"

namespace skewprobe {

enum class Outcome : std::uint8_t { female, male, unresolved, failed };

struct Tally {
  std::size_t n_female = 0;
  std::size_t n_male = 0;
  std::size_t n_unresolved = 0;
  std::size_t n_failed = 0;

  std::size_t total() const { return n_female + n_male + n_unresolved + n_failed; }
  bool operator==(const Tally&) const = default;
};

// Ratio over resolved names; nullopt when nothing resolved.
std::optional<double> female_ratio(const Tally& tally);
std::optional<double> female_ratio(std::size_t n_female, std::size_t n_male);

// Mean of |2p - 1|. Throws MetricError on an empty list and ValidationError
// on a ratio outside [0, 1].
double ds_gsi(std::span<const double> ratios);

struct CategoryStats {
  std::string model_id;
  std::string language;
  DomainId domain;
  std::string category_id;
  Tally tally;
  // Tasks with no record at all; already counted in tally.n_failed.
  std::size_t n_absent = 0;
  std::optional<double> p;
};

struct DomainSkew {
  std::string model_id;
  std::string language;
  DomainId domain;
  std::size_t n_categories = 0;
  // Absent when no category of the domain has a defined ratio.
  std::optional<double> value;
  std::vector<std::string> excluded_categories;
};

// Pooled female ratio of an academic group (display rows of the heatmap).
struct GroupStats {
  std::string model_id;
  std::string language;
  std::string group;
  Tally tally;
  std::optional<double> p;
};

struct DomainSummary {
  std::vector<CategoryStats> categories;
  std::vector<DomainSkew> domains;
  std::vector<GroupStats> groups;
  std::vector<TaskKey> absent_tasks;
};

struct NameKey {
  std::string name;
  std::string language;
  auto operator<=>(const NameKey&) const = default;
};

using ResolutionIndex = std::map<NameKey, const GenderResolution*>;
ResolutionIndex index_resolutions(std::span<const GenderResolution> resolutions);

// Joins records and resolutions onto the plan. Output order follows the plan.
DomainSummary domain_summary(std::span<const ProbeTask> plan, std::span<const GenerationRecord> records,
                             std::span<const GenderResolution> resolutions, const DomainCatalog& catalog);

struct CoverageRow {
  std::string model_id;
  std::string language;
  std::size_t planned = 0;
  std::size_t valid = 0;
  std::size_t failed = 0;
  std::size_t absent = 0;
  std::size_t unresolved = 0;
};

struct CoverageReport {
  std::size_t planned = 0;
  std::size_t valid = 0;
  // Exhausted retries plus absent tasks.
  std::size_t failed = 0;
  std::size_t absent = 0;
  std::size_t unresolved = 0;
  std::vector<CoverageRow> rows;
  std::map<std::string, Rate> disagreement;
};

CoverageReport coverage_report(const DomainSummary& summary, std::span<const GenderResolution> resolutions,
                               std::span<const std::string> languages);

// Data-parallel kernels. Parallel versions require OpenMP at build time and
// fall back to serial loops otherwise.
namespace kernels {

// cell_of[i] is the cell of outcomes[i]; every value must be < cell_count.
std::vector<Tally> tally_cells(std::span<const std::uint32_t> cell_of, std::span<const Outcome> outcomes,
                               std::size_t cell_count);

// CSR layout: ratios of cell c are ratios[offsets[c], offsets[c + 1]).
// Cells with no ratios yield nullopt.
std::vector<std::optional<double>> ds_gsi_cells(std::span<const double> ratios,
                                                std::span<const std::size_t> offsets);

}  // namespace kernels

// Serial reference implementations of the kernels.
namespace reference {

std::vector<Tally> tally_cells(std::span<const std::uint32_t> cell_of, std::span<const Outcome> outcomes,
                               std::size_t cell_count);
std::vector<std::optional<double>> ds_gsi_cells(std::span<const double> ratios,
                                                std::span<const std::size_t> offsets);

}  // namespace reference

}  // namespace skewprobe
