#include "skewprobe/metrics.hpp"

#include <tuple>
#include <unordered_map>

#include "skewprobe/errors.hpp"

namespace skewprobe {

std::optional<double> female_ratio(std::size_t n_female, std::size_t n_male) {
  if (n_female + n_male == 0) return std::nullopt;
  return static_cast<double>(n_female) / static_cast<double>(n_female + n_male);
}

std::optional<double> female_ratio(const Tally& tally) { return female_ratio(tally.n_female, tally.n_male); }

ResolutionIndex index_resolutions(std::span<const GenderResolution> resolutions) {
  ResolutionIndex index;
  for (const auto& r : resolutions) index.try_emplace(NameKey{r.name, r.language}, &r);
  return index;
}

namespace {

struct TaskKeyHash {
  std::size_t operator()(const TaskKey& k) const {
    std::size_t h = std::hash<std::string>{}(k.model_id);
    const auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(std::hash<std::string>{}(k.language));
    mix(static_cast<std::size_t>(k.domain));
    mix(std::hash<std::string>{}(k.category_id));
    mix(static_cast<std::size_t>(k.trial_index));
    return h;
  }
};

using CellKey = std::tuple<std::string, std::string, std::string>;  // model, language, category

}  // namespace

DomainSummary domain_summary(std::span<const ProbeTask> plan, std::span<const GenerationRecord> records,
                             std::span<const GenderResolution> resolutions, const DomainCatalog& catalog) {
  std::unordered_map<TaskKey, std::size_t, TaskKeyHash> plan_index;
  plan_index.reserve(plan.size());
  std::map<CellKey, std::uint32_t> cell_ids;
  std::vector<std::uint32_t> cell_of(plan.size());
  DomainSummary summary;

  for (std::size_t i = 0; i < plan.size(); ++i) {
    const TaskKey& key = plan[i].key;
    if (!plan_index.emplace(key, i).second) throw ValidationError("duplicate task in plan: " + key.to_string());
    CellKey cell{key.model_id, key.language, key.category_id};
    auto [it, inserted] = cell_ids.try_emplace(cell, static_cast<std::uint32_t>(summary.categories.size()));
    if (inserted) {
      CategoryStats stats;
      stats.model_id = key.model_id;
      stats.language = key.language;
      stats.domain = key.domain;
      stats.category_id = key.category_id;
      summary.categories.push_back(std::move(stats));
    }
    cell_of[i] = it->second;
  }

  const ResolutionIndex by_name = index_resolutions(resolutions);
  std::vector<Outcome> outcomes(plan.size(), Outcome::failed);
  std::vector<bool> seen(plan.size(), false);
  for (const auto& record : records) {
    auto it = plan_index.find(record.task);
    if (it == plan_index.end()) continue;
    seen[it->second] = true;
    if (!record.name) continue;
    auto res = by_name.find(NameKey{*record.name, record.task.language});
    if (res == by_name.end()) {
      outcomes[it->second] = Outcome::unresolved;
      continue;
    }
    switch (res->second->label) {
      case ResolvedLabel::female: outcomes[it->second] = Outcome::female; break;
      case ResolvedLabel::male: outcomes[it->second] = Outcome::male; break;
      case ResolvedLabel::unresolved: outcomes[it->second] = Outcome::unresolved; break;
    }
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!seen[i]) {
      summary.absent_tasks.push_back(plan[i].key);
      ++summary.categories[cell_of[i]].n_absent;
    }
  }

  const auto tallies = kernels::tally_cells(cell_of, outcomes, summary.categories.size());
  for (std::size_t c = 0; c < summary.categories.size(); ++c) {
    summary.categories[c].tally = tallies[c];
    summary.categories[c].p = female_ratio(tallies[c]);
  }

  // Domain cells in first-appearance order, with CSR ratio lists for the kernel.
  std::map<std::tuple<std::string, std::string, DomainId>, std::size_t> domain_ids;
  std::vector<std::vector<double>> per_domain;
  for (const auto& stats : summary.categories) {
    auto [it, inserted] = domain_ids.try_emplace({stats.model_id, stats.language, stats.domain}, summary.domains.size());
    if (inserted) {
      summary.domains.push_back({stats.model_id, stats.language, stats.domain, 0, std::nullopt, {}});
      per_domain.emplace_back();
    }
    if (stats.p) {
      per_domain[it->second].push_back(*stats.p);
    } else {
      summary.domains[it->second].excluded_categories.push_back(stats.category_id);
    }
  }
  std::vector<double> flat;
  std::vector<std::size_t> offsets{0};
  for (const auto& ratios : per_domain) {
    flat.insert(flat.end(), ratios.begin(), ratios.end());
    offsets.push_back(flat.size());
  }
  const auto values = kernels::ds_gsi_cells(flat, offsets);
  for (std::size_t d = 0; d < summary.domains.size(); ++d) {
    summary.domains[d].n_categories = per_domain[d].size();
    summary.domains[d].value = values[d];
  }

  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> group_ids;
  for (const auto& stats : summary.categories) {
    const Category* category = catalog.find(stats.category_id);
    if (!category || !category->group) continue;
    auto [it, inserted] = group_ids.try_emplace({stats.model_id, stats.language, *category->group}, summary.groups.size());
    if (inserted) summary.groups.push_back({stats.model_id, stats.language, *category->group, {}, std::nullopt});
    Tally& t = summary.groups[it->second].tally;
    t.n_female += stats.tally.n_female;
    t.n_male += stats.tally.n_male;
    t.n_unresolved += stats.tally.n_unresolved;
    t.n_failed += stats.tally.n_failed;
  }
  for (auto& g : summary.groups) g.p = female_ratio(g.tally);
  return summary;
}

CoverageReport coverage_report(const DomainSummary& summary, std::span<const GenderResolution> resolutions,
                               std::span<const std::string> languages) {
  CoverageReport report;
  std::map<std::pair<std::string, std::string>, std::size_t> rows;
  for (const auto& stats : summary.categories) {
    auto [it, inserted] = rows.try_emplace({stats.model_id, stats.language}, report.rows.size());
    if (inserted) report.rows.push_back({stats.model_id, stats.language});
    CoverageRow& row = report.rows[it->second];
    const Tally& t = stats.tally;
    row.planned += t.total();
    row.valid += t.n_female + t.n_male + t.n_unresolved;
    row.failed += t.n_failed;
    row.absent += stats.n_absent;
    row.unresolved += t.n_unresolved;
  }
  for (const auto& row : report.rows) {
    report.planned += row.planned;
    report.valid += row.valid;
    report.failed += row.failed;
    report.absent += row.absent;
    report.unresolved += row.unresolved;
  }
  for (const auto& language : languages) {
    try {
      report.disagreement.emplace(language, disagreement_rate(resolutions, language));
    } catch (const MetricError&) {
      // No names in this language: rate undefined, left out.
    }
  }
  return report;
}

}  // namespace skewprobe
