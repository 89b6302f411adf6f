#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dbf/bootstrap.hpp"
#include "dbf/stats.hpp"

using namespace dbf;

namespace {

PayoffMatrix P(const std::string& s) { return PayoffMatrix::parse(s); }

BootstrapConfig occupied(const std::shared_ptr<const Torus>& t, std::initializer_list<std::vector<int>> sites) {
  BootstrapConfig z(t, false);
  for (const auto& c : sites) z.bits[t->index(c)] = 1;
  return z;
}

}  // namespace

TEST(ExtractCenters, Examples) {
  const auto t = Torus::make(1, 1, {9});
  EXPECT_TRUE(extract_centers(Configuration(t, Strategy::kOne)).full());
  EXPECT_EQ(extract_centers(Configuration(t, Strategy::kTwo)).count(), 0);
  Configuration xi(t, Strategy::kOne);
  xi.set(4, Strategy::kTwo);
  const auto eta = extract_centers(xi);
  for (std::int64_t x = 0; x < 9; ++x) EXPECT_EQ(eta[x], std::abs(x - 4) > 1) << x;
}

TEST(ExtractCenters, MatchesProductDefinition) {
  std::mt19937_64 g(3);
  const auto t = Torus::make(2, 1, {7, 8});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Strategy> cells(56);
    for (auto& c : cells) c = g() % 5 ? Strategy::kOne : Strategy::kTwo;
    const Configuration xi(t, cells);
    const auto eta = extract_centers(xi);
    for (std::int64_t x = 0; x < t->size(); ++x) {
      bool all = true;
      for (auto z : t->ball(x, 1)) all = all && xi[z] == Strategy::kOne;
      EXPECT_EQ(eta[x], all);
    }
  }
}

TEST(BootstrapStep, OneDimensionalGrowth) {
  const auto t = Torus::make(1, 1, {21});
  auto z = occupied(t, {{10}});
  for (int k = 1; k <= 10; ++k) {
    z = bootstrap_step(z);
    for (int x = 10 - k; x <= 10 + k; ++x) EXPECT_TRUE(z[x]) << k << " " << x;
  }
  EXPECT_TRUE(z.full());
  EXPECT_TRUE(bootstrap_limit(occupied(t, {{3}})).field.full());
}

TEST(BootstrapStep, SingleSiteIsFixedInTwoDimensions) {
  const auto t = Torus::make(2, 1, {10, 10});
  const auto z = occupied(t, {{0, 0}});
  EXPECT_EQ(bootstrap_step(z), z);
  EXPECT_EQ(bootstrap_limit(z).steps, 0);
}

TEST(BootstrapStep, DiagonalPairFillsASquare) {
  const auto t = Torus::make(2, 1, {10, 10});
  const auto lim = bootstrap_limit(occupied(t, {{0, 0}, {1, 1}}));
  EXPECT_EQ(lim.field, occupied(t, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_EQ(lim.steps, 1);
  EXPECT_EQ(bootstrap_step(lim.field), lim.field);
}

TEST(BootstrapLimit, Extremes) {
  const auto t = Torus::make(2, 1, {8, 8});
  EXPECT_EQ(bootstrap_limit(BootstrapConfig(t, false)).field.count(), 0);
  EXPECT_TRUE(bootstrap_limit(BootstrapConfig(t, true)).field.full());
}

TEST(BootstrapStep, MonotoneInInitialData) {
  std::mt19937_64 g(9);
  const auto t = Torus::make(2, 1, {12, 12});
  for (int trial = 0; trial < 100; ++trial) {
    BootstrapConfig a(t, false), b(t, false);
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
      a.bits[i] = g() % 6 == 0;
      b.bits[i] = a.bits[i] || g() % 8 == 0;
    }
    const auto a1 = bootstrap_step(a), b1 = bootstrap_step(b);
    EXPECT_TRUE(a.subset_of(a1));
    EXPECT_TRUE(a1.subset_of(b1));
    EXPECT_TRUE(bootstrap_limit(a).field.subset_of(bootstrap_limit(b).field));
  }
}

TEST(CoupledInitials, Densities) {
  const auto t = Torus::make(1, 1, {100000});
  const auto ci = coupled_initials(0.5, t, 1);
  const double n = 100000.0;
  EXPECT_NEAR(ci.xi0.count(Strategy::kOne) / n, 0.5, 5 * std::sqrt(0.25 / n));
  EXPECT_NEAR(ci.zeta0.count() / n, 0.125, 5 * std::sqrt(0.125 * 0.875 / n));
  const auto full = coupled_initials(1.0, Torus::make(2, 1, {6, 6}), 2);
  EXPECT_EQ(full.xi0.count(Strategy::kOne), 36);
  EXPECT_TRUE(full.zeta0.full());
  EXPECT_ANY_THROW(coupled_initials(1.2, t, 1));
}

TEST(CoupledInitials, CentersDominateSingletons) {
  const auto t = Torus::make(1, 1, {100000});
  const auto ci = coupled_initials(0.5, t, 4);
  const double n = 100000.0;
  const double centers = extract_centers(ci.xi0).count() / n;
  const double occ = ci.zeta0.count() / n;
  EXPECT_NEAR(centers, 0.125, 5 * std::sqrt(0.125 * 0.875 / n));
  EXPECT_GE(centers + 5 * std::sqrt(0.125 * 0.875 / n), occ);
}

TEST(CenterMonotonicity, CleanUnderWeakCondition) {
  const auto t = Torus::make(2, 1, {15, 15});
  for (const char* s : {"3 0 2 1", "3 4 2 1"}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunOptions ro;
      ro.horizon = 50.0;
      const auto tr = run(sample_product_measure(0.6, t, seed), P(s), seed, ro);
      EXPECT_TRUE(monitor_center_monotonicity(tr).clean());
      EXPECT_TRUE(monitor_center_monotonicity(tr, true).clean());
    }
  }
}

TEST(CenterMonotonicity, AllOneIsVacuous) {
  const auto t = Torus::make(2, 1, {6, 6});
  RunOptions ro;
  ro.horizon = 10.0;
  ro.stop_on_absorption = false;
  const auto tr = Simulator(Configuration(t, Strategy::kOne), P("0 5 9 9"), 1, {.track_absorption = false}).run(ro);
  const auto rep = monitor_center_monotonicity(tr);
  EXPECT_TRUE(rep.clean());
  EXPECT_EQ(rep.flips_checked, 0U);
}

TEST(CenterMonotonicity, ViolationsFoundWithoutWeakCondition) {
  // a11 = 0 and a21 = a22 = 1: a center's neighbor earns less than a type-2 player.
  const auto t = Torus::make(2, 1, {12, 12});
  const auto p = P("0 1 1 1");
  ASSERT_FALSE(region_predicates(p, t->spec()).weak);
  bool found = false;
  for (std::uint64_t seed = 1; seed <= 20 && !found; ++seed) {
    RunOptions ro;
    ro.horizon = 20.0;
    const auto tr = run(sample_product_measure(0.7, t, seed), p, seed, ro);
    const auto rep = monitor_center_monotonicity(tr);
    const auto full = monitor_center_monotonicity(tr, true);
    EXPECT_EQ(rep.violations.size(), full.violations.size());
    found = !rep.clean();
  }
  EXPECT_TRUE(found);
}

TEST(CenterMonitor, LiveMatchesReplay) {
  const auto t = Torus::make(2, 1, {12, 12});
  const auto p = P("0 1 1 1");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CenterMonitor live;
    RunOptions ro;
    ro.horizon = 20.0;
    Simulator sim(sample_product_measure(0.7, t, seed), p, seed);
    const auto tr = sim.run(ro, [&](const Simulator& s, const EventRecord& e) { live(s, e); });
    EXPECT_EQ(live.violations().size(), monitor_center_monotonicity(tr).violations.size());
  }
}

TEST(CenterFilling, FailureFrequencyBelowEnvelope) {
  // Strong condition: (N-1)a11 + min(a11,a12) > N max(a21,a22).
  const auto t = Torus::make(2, 1, {40, 40});
  const auto p = P("3 2 2 1");
  ASSERT_TRUE(region_predicates(p, t->spec()).strong);
  FillingCount total;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Simulator sim(sample_product_measure(0.5, t, seed), p, seed, {.track_absorption = false});
    RunOptions ro;
    ro.stop_on_absorption = false;
    ro.log = LogMode::kNone;
    for (int step = 1; step <= 4; ++step) {
      const Configuration before = sim.state();
      ro.horizon = static_cast<double>(step);
      sim.run(ro);
      const auto fc = center_filling_count(before, sim.state());
      total.trials += fc.trials;
      total.failures += fc.failures;
    }
  }
  ASSERT_GT(total.trials, 100);
  const double bound = std::exp(-1.0);
  const double freq = static_cast<double>(total.failures) / static_cast<double>(total.trials);
  EXPECT_TRUE(stats::passes_upper(freq, bound, total.trials)) << freq << " over " << total.trials;
}

TEST(SiteField, TextRoundTrip) {
  const auto t = Torus::make(2, 1, {6, 7});
  const auto z = sample_site_field(0.3, t, 5);
  std::ostringstream os;
  write_site_field(os, z);
  std::istringstream is(os.str());
  EXPECT_EQ(read_site_field(is), z);
  std::istringstream bad("1 1 5\n01201");
  EXPECT_ANY_THROW(read_site_field(bad));
}
