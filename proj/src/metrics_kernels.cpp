#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "skewprobe/errors.hpp"
#include "skewprobe/metrics.hpp"

namespace skewprobe {

namespace {

void bump(Tally& t, Outcome o) {
  switch (o) {
    case Outcome::female: ++t.n_female; break;
    case Outcome::male: ++t.n_male; break;
    case Outcome::unresolved: ++t.n_unresolved; break;
    case Outcome::failed: ++t.n_failed; break;
  }
}

void check_shapes(std::span<const std::uint32_t> cell_of, std::span<const Outcome> outcomes) {
  if (cell_of.size() != outcomes.size()) throw UsageError("tally_cells: cell_of and outcomes differ in length");
}

double skew_term(double p) { return std::fabs(2.0 * p - 1.0); }

}  // namespace

double ds_gsi(std::span<const double> ratios) {
  if (ratios.empty()) throw MetricError("DS-GSI undefined for an empty ratio list");
  double sum = 0.0;
  for (double p : ratios) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("female ratio outside [0, 1]: " + std::to_string(p));
    sum += skew_term(p);
  }
  return sum / static_cast<double>(ratios.size());
}

namespace kernels {

std::vector<Tally> tally_cells(std::span<const std::uint32_t> cell_of, std::span<const Outcome> outcomes,
                               std::size_t cell_count) {
  check_shapes(cell_of, outcomes);
  std::vector<Tally> totals(cell_count);
  const auto n = static_cast<std::int64_t>(outcomes.size());
  bool out_of_range = false;
#pragma omp parallel
  {
    std::vector<Tally> local(cell_count);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const auto cell = cell_of[static_cast<std::size_t>(i)];
      if (cell >= cell_count) {
#pragma omp atomic write
        out_of_range = true;
        continue;
      }
      bump(local[cell], outcomes[static_cast<std::size_t>(i)]);
    }
#pragma omp critical(skewprobe_tally_merge)
    for (std::size_t c = 0; c < cell_count; ++c) {
      totals[c].n_female += local[c].n_female;
      totals[c].n_male += local[c].n_male;
      totals[c].n_unresolved += local[c].n_unresolved;
      totals[c].n_failed += local[c].n_failed;
    }
  }
  if (out_of_range) throw UsageError("tally_cells: cell index out of range");
  return totals;
}

std::vector<std::optional<double>> ds_gsi_cells(std::span<const double> ratios,
                                                std::span<const std::size_t> offsets) {
  if (offsets.empty() || offsets.back() != ratios.size()) throw UsageError("ds_gsi_cells: bad offsets");
  const auto cells = static_cast<std::int64_t>(offsets.size() - 1);
  std::vector<std::optional<double>> out(static_cast<std::size_t>(cells));
  bool bad_ratio = false;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto begin = offsets[static_cast<std::size_t>(c)];
    const auto end = offsets[static_cast<std::size_t>(c) + 1];
    if (end <= begin) continue;
    // Same summation order as ds_gsi so results are bitwise identical.
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double p = ratios[i];
      if (!(p >= 0.0 && p <= 1.0)) {
#pragma omp atomic write
        bad_ratio = true;
      }
      sum += skew_term(p);
    }
    out[static_cast<std::size_t>(c)] = sum / static_cast<double>(end - begin);
  }
  if (bad_ratio) throw ValidationError("ds_gsi_cells: female ratio outside [0, 1]");
  return out;
}

}  // namespace kernels

namespace reference {

std::vector<Tally> tally_cells(std::span<const std::uint32_t> cell_of, std::span<const Outcome> outcomes,
                               std::size_t cell_count) {
  check_shapes(cell_of, outcomes);
  std::vector<Tally> totals(cell_count);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (cell_of[i] >= cell_count) throw UsageError("tally_cells: cell index out of range");
    bump(totals[cell_of[i]], outcomes[i]);
  }
  return totals;
}

std::vector<std::optional<double>> ds_gsi_cells(std::span<const double> ratios,
                                                std::span<const std::size_t> offsets) {
  if (offsets.empty() || offsets.back() != ratios.size()) throw UsageError("ds_gsi_cells: bad offsets");
  std::vector<std::optional<double>> out;
  for (std::size_t c = 0; c + 1 < offsets.size(); ++c) {
    if (offsets[c + 1] <= offsets[c]) {
      out.emplace_back();
      continue;
    }
    out.emplace_back(ds_gsi(ratios.subspan(offsets[c], offsets[c + 1] - offsets[c])));
  }
  return out;
}

}  // namespace reference

}  // namespace skewprobe
