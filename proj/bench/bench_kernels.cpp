// Parallel kernels against the serial reference on run-sized inputs.
#include <benchmark/benchmark.h>

#include <random>

#include "skewprobe/metrics.hpp"

using namespace skewprobe;

namespace {

struct TallyInput {
  std::vector<std::uint32_t> cell_of;
  std::vector<Outcome> outcomes;
  std::size_t cells;
};

TallyInput tally_input(std::size_t n, std::size_t cells) {
  std::mt19937_64 rng(7);
  TallyInput in{{}, {}, cells};
  in.cell_of.resize(n);
  in.outcomes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.cell_of[i] = static_cast<std::uint32_t>(rng() % cells);
    in.outcomes[i] = static_cast<Outcome>(rng() % 4);
  }
  return in;
}

struct RatioInput {
  std::vector<double> ratios;
  std::vector<std::size_t> offsets;
};

RatioInput ratio_input(std::size_t cells, std::size_t per_cell) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RatioInput in;
  in.offsets.push_back(0);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t k = 0; k < per_cell; ++k) in.ratios.push_back(u(rng));
    in.offsets.push_back(in.ratios.size());
  }
  return in;
}

template <auto Fn>
void tally(benchmark::State& state) {
  // one model-language slice per 100 trials x 96 categories
  const auto in = tally_input(static_cast<std::size_t>(state.range(0)), 96 * 8);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(in.cell_of, in.outcomes, in.cells));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void dsgsi(benchmark::State& state) {
  const auto in = ratio_input(static_cast<std::size_t>(state.range(0)), 40);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(in.ratios, in.offsets));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.ratios.size()));
}

}  // namespace

BENCHMARK(tally<&reference::tally_cells>)->Name("tally/serial")->Arg(76800)->Arg(1 << 21);
BENCHMARK(tally<&kernels::tally_cells>)->Name("tally/parallel")->Arg(76800)->Arg(1 << 21);
BENCHMARK(dsgsi<&reference::ds_gsi_cells>)->Name("ds_gsi/serial")->Arg(32)->Arg(1 << 15);
BENCHMARK(dsgsi<&kernels::ds_gsi_cells>)->Name("ds_gsi/parallel")->Arg(32)->Arg(1 << 15);

BENCHMARK_MAIN();
