#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skewprobe/catalog.hpp"
#include "skewprobe/metrics.hpp"

namespace skewprobe {

// Fixed six-decimal rendering used in the CSV files.
std::string format_fixed6(double value);
// Round-half-even of a fixed-point decimal string to two decimals.
std::string round_half_even_2(std::string_view decimal);
// The number shown in figures: round_half_even_2(format_fixed6(value)).
std::string display_value(double value);

struct RunMetadata {
  std::string config_hash;
  std::string trace_path;
  std::string catalog_version;
  // Extra recorded settings (name rules, registry provenance, ...).
  nlohmann::json settings = nlohmann::json::object();
};

inline constexpr const char* kCategoryStatsFile = "category_stats.csv";
inline constexpr const char* kDomainSkewFile = "domain_skew.csv";
inline constexpr const char* kGroupStatsFile = "group_stats.csv";
inline constexpr const char* kSummaryFile = "summary.json";

std::string category_stats_csv(std::span<const CategoryStats> stats);
std::string domain_skew_csv(std::span<const DomainSkew> skews);
// Pooled academic groups; the rows of the academic heatmaps.
std::string group_stats_csv(std::span<const GroupStats> groups);
nlohmann::json summary_json(const DomainSummary& summary, const CoverageReport& coverage, const RunMetadata& meta);

// Writes category_stats.csv, domain_skew.csv, group_stats.csv and summary.json. Throws ReportError on I/O failure.
std::vector<std::filesystem::path> emit_tables(const DomainSummary& summary, const CoverageReport& coverage,
                                               const RunMetadata& meta, const std::filesystem::path& out_dir);

struct HeatmapSpec {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  // rows x columns; nullopt renders as a hatched cell.
  std::vector<std::vector<std::optional<double>>> cells;
  std::string language;
  std::string title;

  void validate() const;
};

struct GroupedBarSpec {
  std::vector<std::string> groups;
  std::vector<std::string> series;
  // groups x series; nullopt draws no bar.
  std::vector<std::vector<std::optional<double>>> values;
  std::string title;

  void validate() const;
};

// Two-ended scale: 0 maps to the male-end color, 1 to the female-end color.
std::string heatmap_color(double value);

std::string heatmap_svg(const HeatmapSpec& spec);
std::string grouped_bars_svg(const GroupedBarSpec& spec);
void render_heatmap(const HeatmapSpec& spec, const std::filesystem::path& out_path);
void render_grouped_bars(const GroupedBarSpec& spec, const std::filesystem::path& out_path);

// Figure specs derived from a summary. Columns/series follow model_ids order.
HeatmapSpec heatmap_for(const DomainSummary& summary, const DomainCatalog& catalog, DomainId domain,
                        const std::string& language, std::span<const std::string> model_ids);
GroupedBarSpec grouped_bars_for(const DomainSummary& summary, const DomainCatalog& catalog,
                                const std::string& language, std::span<const std::string> model_ids);

std::string heatmap_file_name(DomainId domain, const std::string& language);
std::string grouped_bars_file_name(const std::string& language);

// One heatmap per (domain, language) plus one grouped-bar chart per language.
std::vector<std::filesystem::path> emit_figures(const DomainSummary& summary, const DomainCatalog& catalog,
                                                std::span<const std::string> languages,
                                                std::span<const std::string> model_ids,
                                                const std::filesystem::path& out_dir);

}  // namespace skewprobe
