#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "skewprobe/errors.hpp"
#include "skewprobe/metrics.hpp"
#include "test_support.hpp"

using namespace skewprobe;

namespace {

constexpr double kTol = 1e-12;

// mean of |2p - 1| evaluated directly, without the library
double direct(const std::vector<double>& p) {
  long double s = 0;
  for (double x : p) s += std::fabs(2.0L * x - 1.0L);
  return static_cast<double>(s / p.size());
}

std::vector<double> random_ratios(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 96);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(len(rng)));
  for (auto& x : p) x = u(rng);
  return p;
}

struct Fixture {
  DomainCatalog catalog = DomainCatalog::load_file(testing::data_dir() / "catalog.json");
  TemplateSet templates = TemplateSet::load_file(testing::data_dir() / "templates.json");
  std::vector<ProbeTask> plan;
  std::vector<GenerationRecord> records;
  std::vector<GenderResolution> resolutions;

  explicit Fixture(int trials, std::vector<std::string> langs = {"en"}) {
    plan = enumerate_probes({{"m"}, langs, trials}, catalog, templates);
    for (const char* name : {"Fem", "Mal", "Unk"}) {
      for (const auto& lang : langs) {
        const Gender g = name[0] == 'F' ? Gender::female : name[0] == 'M' ? Gender::male : Gender::unknown;
        resolutions.push_back(resolve(name, lang, {OracleId::A, g, {}}, {OracleId::B, g, {}}, Registry{}));
      }
    }
  }
  void add(const ProbeTask& task, std::optional<std::string> name) {
    GenerationRecord r;
    r.task = task.key;
    if (name) {
      r.attempts = {{0, "p", *name, 1, std::nullopt}};
      r.name = name;
    } else {
      r.attempts = {{0, "p", "", 1, RejectReason::empty}, {1, "p", "", 1, RejectReason::empty},
                    {2, "p", "", 1, RejectReason::empty}};
      r.failure = RejectReason::empty;
    }
    records.push_back(r);
  }
  DomainSummary summary() const { return domain_summary(plan, records, resolutions, catalog); }
};

const DomainSkew& skew_of(const DomainSummary& s, DomainId d) {
  return *std::find_if(s.domains.begin(), s.domains.end(), [&](const DomainSkew& x) { return x.domain == d; });
}

}  // namespace

TEST_CASE("female_ratio") {
  CHECK(female_ratio(3, 1) == 0.75);
  CHECK(female_ratio(0, 100) == 0.0);
  CHECK(!female_ratio(0, 0));
  CHECK(female_ratio(Tally{2, 2, 5, 1}) == 0.5);
  CHECK(!female_ratio(Tally{0, 0, 7, 3}));
}

TEST_CASE("ds_gsi examples") {
  const std::vector<double> half = {0.5, 0.5, 0.5};
  CHECK(ds_gsi(half) == 0.0);
  const std::vector<double> ends = {0.0, 1.0};
  CHECK(ds_gsi(ends) == 1.0);
  const std::vector<double> worked = {0.9, 0.1, 0.5, 1.0};
  CHECK(std::fabs(ds_gsi(worked) - 0.65) <= kTol);
  CHECK(std::fabs(direct(worked) - 0.65) <= kTol);
  CHECK_THROWS_AS(ds_gsi(std::vector<double>{}), MetricError);
  CHECK_THROWS_AS(ds_gsi(std::vector<double>{0.2, 1.5}), ValidationError);
  CHECK_THROWS_AS(ds_gsi(std::vector<double>{std::nan("")}), ValidationError);
}

TEST_CASE("ds_gsi properties over generated vectors") {
  std::mt19937_64 rng(20250301);
  for (int trial = 0; trial < 2000; ++trial) {
    auto p = random_ratios(rng);
    const double v = ds_gsi(p);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::fabs(v - direct(p)) <= kTol);

    auto reflected = p;
    for (auto& x : reflected) x = 1.0 - x;
    CHECK(std::fabs(ds_gsi(reflected) - v) <= kTol);

    auto shuffled = p;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(std::fabs(ds_gsi(shuffled) - v) <= kTol);

    // pushing one ratio away from 0.5 never lowers the index
    auto pushed = p;
    auto& x = pushed[rng() % pushed.size()];
    x = x >= 0.5 ? std::min(1.0, x + 0.1) : std::max(0.0, x - 0.1);
    CHECK(ds_gsi(pushed) >= v - kTol);

    std::vector<double> balanced(p.size(), 0.5);
    CHECK(ds_gsi(balanced) == 0.0);
    std::vector<double> extreme(p.size());
    for (auto& e : extreme) e = static_cast<double>(rng() % 2);
    CHECK(ds_gsi(extreme) == 1.0);
  }
}

TEST_CASE("domain where every category is all male") {
  Fixture f(4);
  for (const auto& t : f.plan) f.add(t, "Mal");
  const auto s = f.summary();
  REQUIRE(s.domains.size() == 4);
  for (const auto& d : s.domains) CHECK(d.value == 1.0);
  for (const auto& c : s.categories) CHECK(c.p == 0.0);
}

TEST_CASE("balanced categories give zero") {
  Fixture f(4);
  for (const auto& t : f.plan) f.add(t, t.key.trial_index % 2 ? "Fem" : "Mal");
  for (const auto& d : f.summary().domains) CHECK(d.value == 0.0);
}

TEST_CASE("mixed profession domain matches a direct evaluation") {
  Fixture f(10);
  const std::vector<int> females = {0, 1, 2, 3, 5, 5, 7, 8, 9, 10};
  std::map<std::string, int> k;
  const auto professions = f.catalog.categories_of(DomainId::profession);
  for (std::size_t i = 0; i < professions.size(); ++i) k[professions[i]->id] = females[i];
  for (const auto& t : f.plan) {
    const bool fem = k.count(t.key.category_id) ? t.key.trial_index < k[t.key.category_id] : true;
    f.add(t, fem ? "Fem" : "Mal");
  }
  std::vector<double> p;
  for (int x : females) p.push_back(x / 10.0);
  const double oracle = direct(p);
  CHECK(std::fabs(oracle - 0.56) <= kTol);  // frozen: (1+.8+.6+.4+0+0+.4+.6+.8+1)/10
  CHECK(std::fabs(*skew_of(f.summary(), DomainId::profession).value - oracle) <= kTol);
}

TEST_CASE("unresolved and failed are excluded from the ratio") {
  Fixture f(4);
  for (const auto& t : f.plan) {
    if (t.key.category_id == "pink") {
      f.add(t, t.key.trial_index == 0 ? std::optional<std::string>("Fem")
                                      : t.key.trial_index == 1 ? std::optional<std::string>("Unk") : std::nullopt);
    } else if (t.key.category_id == "blue") {
      f.add(t, "Unk");
    } else if (t.key.category_id != "gray") {
      f.add(t, "Mal");
    }
  }
  const auto s = f.summary();
  const auto pink = *std::find_if(s.categories.begin(), s.categories.end(), [](auto& c) { return c.category_id == "pink"; });
  CHECK(pink.tally == Tally{1, 0, 1, 2});
  CHECK(pink.p == 1.0);
  const auto& color = skew_of(s, DomainId::color);
  CHECK(color.n_categories == 8);
  CHECK(color.excluded_categories == std::vector<std::string>{"blue", "gray"});
  CHECK(s.absent_tasks.size() == 4);
  const auto gray = *std::find_if(s.categories.begin(), s.categories.end(), [](auto& c) { return c.category_id == "gray"; });
  CHECK(gray.n_absent == 4);
  CHECK(gray.tally.n_failed == 4);
  CHECK(!gray.p);
  for (const auto& c : s.categories) CHECK(c.tally.total() == 4);
}

TEST_CASE("academic groups pool their fields") {
  Fixture f(2);
  for (const auto& t : f.plan) f.add(t, t.key.category_id == "aerospace_engineering" ? "Fem" : "Mal");
  const auto s = f.summary();
  CHECK(s.groups.size() == 10);
  const auto& eng = s.groups.front();
  CHECK(eng.group == "Engineering & Technology");
  CHECK(eng.tally.n_female == 2);
  std::size_t fields = 0;
  for (const auto* c : f.catalog.categories_of(DomainId::academic_discipline)) fields += c->group == eng.group;
  CHECK(eng.tally.n_male == 2 * (fields - 1));
  CHECK(eng.p == doctest::Approx(2.0 / (2.0 * static_cast<double>(fields))));
}

TEST_CASE("coverage counts") {
  Fixture f(100);
  int failed = 0;
  for (std::size_t i = 0; i < f.plan.size(); ++i) {
    const auto& t = f.plan[i];
    const bool fail = i % 200 == 7 && failed < 43;
    failed += fail;
    f.add(t, fail ? std::nullopt : std::optional<std::string>("Fem"));
  }
  REQUIRE(failed == 43);
  const auto s = f.summary();
  const auto c = coverage_report(s, f.resolutions, std::vector<std::string>{"en"});
  CHECK(c.planned == 9600);
  CHECK(c.valid == 9557);
  CHECK(c.failed == 43);
  CHECK(c.rows.size() == 1);

  const auto empty = coverage_report(DomainSummary{}, {}, std::vector<std::string>{"en"});
  CHECK(empty.planned == 0);
  CHECK(empty.valid == 0);
  CHECK(empty.failed == 0);
  CHECK(empty.unresolved == 0);
  CHECK(empty.disagreement.empty());
}

TEST_CASE("English disagreement fixture") {
  std::vector<GenderResolution> rs;
  for (int i = 0; i < 230; ++i) {
    const Gender b = i < 8 ? Gender::female : Gender::male;
    rs.push_back(resolve("n" + std::to_string(i), "en", {OracleId::A, Gender::male, {}}, {OracleId::B, b, {}}, Registry{}));
  }
  const auto c = coverage_report(DomainSummary{}, rs, std::vector<std::string>{"en", "fa"});
  REQUIRE(c.disagreement.count("en"));
  CHECK(c.disagreement.at("en").numerator == 8);
  CHECK(c.disagreement.at("en").denominator == 230);
  CHECK(std::round(c.disagreement.at("en").value() * 10000.0) / 100.0 == 3.48);
  CHECK(!c.disagreement.count("fa"));
}

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    const std::size_t cells = 1 + rng() % 400;
    const std::size_t n = rng() % 50000;
    std::vector<std::uint32_t> cell_of(n);
    std::vector<Outcome> outcomes(n);
    for (std::size_t i = 0; i < n; ++i) {
      cell_of[i] = static_cast<std::uint32_t>(rng() % cells);
      outcomes[i] = static_cast<Outcome>(rng() % 4);
    }
    CHECK(kernels::tally_cells(cell_of, outcomes, cells) == reference::tally_cells(cell_of, outcomes, cells));

    std::vector<double> ratios;
    std::vector<std::size_t> offsets{0};
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t len = rng() % 5 == 0 ? 0 : rng() % 70;
      for (std::size_t i = 0; i < len; ++i) ratios.push_back(u(rng));
      offsets.push_back(ratios.size());
    }
    const auto par = kernels::ds_gsi_cells(ratios, offsets);
    const auto ser = reference::ds_gsi_cells(ratios, offsets);
    REQUIRE(par.size() == ser.size());
    for (std::size_t c = 0; c < par.size(); ++c) {
      CHECK(par[c].has_value() == ser[c].has_value());
      if (par[c]) CHECK(*par[c] == *ser[c]);  // same summation order, bit-identical
    }
  }
}

TEST_CASE("kernel results do not depend on the thread count") {
#ifdef _OPENMP
  std::mt19937_64 rng(11);
  std::vector<double> ratios(100000);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& r : ratios) r = u(rng);
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i <= ratios.size(); i += 1000) offsets.push_back(i);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = kernels::ds_gsi_cells(ratios, offsets);
  omp_set_num_threads(4);
  const auto four = kernels::ds_gsi_cells(ratios, offsets);
  omp_set_num_threads(saved);
  CHECK(one == four);
#endif
}

TEST_CASE("kernel argument checks") {
  std::vector<std::uint32_t> cell_of = {0, 5};
  std::vector<Outcome> outcomes = {Outcome::male, Outcome::female};
  CHECK_THROWS_AS(kernels::tally_cells(cell_of, outcomes, 2), UsageError);
  CHECK_THROWS_AS(kernels::tally_cells(cell_of, std::vector<Outcome>{Outcome::male}, 9), UsageError);
  std::vector<double> ratios = {0.5};
  CHECK_THROWS_AS(kernels::ds_gsi_cells(ratios, std::vector<std::size_t>{0, 2}), UsageError);
}
