#include <gtest/gtest.h>

#include <random>

#include "dbf/interface1d.hpp"
#include "dbf/lattice.hpp"
#include "dbf/stats.hpp"

using namespace dbf;

namespace {

PayoffMatrix P(const std::string& s) { return PayoffMatrix::parse(s); }
Word W(const std::string& s) { return word_from_digits(s); }

const std::array<Strategy, 2> k22{Strategy::kTwo, Strategy::kTwo};
const std::array<Strategy, 2> k11{Strategy::kOne, Strategy::kOne};

}  // namespace

TEST(Word, DigitsRoundTrip) {
  EXPECT_EQ(to_digits(W("12,21 1")), "12211");
  EXPECT_EQ(to_digits(swapped(W("1122"))), "2211");
  EXPECT_ANY_THROW(W("123"));
}

TEST(SegmentRate, AgreesWithRingRates) {
  std::mt19937_64 g(1);
  for (const char* s : {"5 1 3 1", "4 9 10 0", "3 0 2 2", "4 0 9/2 3", "0 1 1 0"}) {
    const auto p = P(s);
    for (int trial = 0; trial < 100; ++trial) {
      const auto t = Torus::make(1, 1, {12});
      std::vector<Strategy> cells(12);
      for (auto& c : cells) c = g() & 1U ? Strategy::kOne : Strategy::kTwo;
      const Configuration xi(t, cells);
      for (std::size_t i = 2; i < 10; ++i) EXPECT_EQ(segment_flip_rate(cells, i, p), flip_rate(static_cast<std::int64_t>(i), xi, p));
    }
  }
  EXPECT_ANY_THROW(segment_flip_rate(W("11111"), 1, P("1 2 3 4")));
}

TEST(FrontState, Examples) {
  EXPECT_EQ(front_state(W("1112122"))->K, 2);
  EXPECT_EQ(front_state(W("1112212"))->K, 3);
  EXPECT_EQ(front_state(W("1112212"))->X, 2);
  EXPECT_FALSE(front_state(W("1112222"))->K.has_value());
  EXPECT_FALSE(front_state(W("11111")).has_value());
  EXPECT_ANY_THROW(front_state(W("2111")));
}

TEST(FrontJumpRates, GoldOneTables) {
  const auto p = P("5 1 3 1");
  const auto k3 = front_jump_rates(W("1111221222"), p);
  EXPECT_EQ(k3, (std::map<std::int64_t, Rational>{{1, Rational(1)}}));
  const auto k4 = front_jump_rates(W("11112221222"), p);
  EXPECT_EQ(k4, (std::map<std::int64_t, Rational>{{1, Rational(1)}}));
  const auto k2 = front_jump_rates(W("111121222"), p);
  EXPECT_EQ(k2, (std::map<std::int64_t, Rational>{{2, Rational(1)}}));
  const auto k2long = front_jump_rates(W("1111211122"), p);
  EXPECT_EQ(k2long, (std::map<std::int64_t, Rational>{{4, Rational(1)}}));
}

TEST(FrontJumpRates, BackwardRateFollowsA11AgainstA21) {
  EXPECT_EQ(front_jump_rates(W("111121222"), P("3 1 3 0")).at(-1), Rational(1, 2));
  EXPECT_EQ(front_jump_rates(W("111121222"), P("3 5 4 0")).at(-1), Rational(1));
  EXPECT_FALSE(front_jump_rates(W("111121222"), P("5 1 3 1")).contains(-1));
}

TEST(ZDrift, Examples) {
  const auto p = P("3 5 4 0");
  ASSERT_TRUE(region_predicates(p, NeighborhoodSpec(1, 1)).gold1);
  EXPECT_EQ(z_drift(W("111121222"), p).sign(), 0);
  EXPECT_EQ(z_drift(W("1111221222"), p), golden_power(-1) - QSqrt5(Rational(1)));
  EXPECT_LT(z_drift(W("111121122"), p).sign(), 0);
  // the value scales with Z = phi^(-X)
  EXPECT_EQ(z_drift(W("1111221222"), p, 3), (golden_power(-1) - QSqrt5(Rational(1))) * golden_power(-3));
}

TEST(ZDrift, NonPositiveOverAllFrontContexts) {
  for (const char* s : {"5 1 3 1", "3 5 4 0", "2 3 2 1"}) {
    const auto p = P(s);
    ASSERT_TRUE(region_predicates(p, NeighborhoodSpec(1, 1)).gold1) << s;
    const std::map<std::int64_t, Rational> worst{{-1, Rational(1)}, {2, Rational(1)}};
    for (const auto& r : enumerate_front_contexts(p, 8)) {
      const int sg = r.drift.sign();
      EXPECT_LE(sg, 0) << s << " " << to_digits(r.cells);
      if (sg == 0) {
        EXPECT_EQ(r.K, 2);
        EXPECT_EQ(r.rates, worst) << to_digits(r.cells);
      }
    }
  }
}

TEST(ZDrift, PositiveOutsideTheGoldRegion) {
  // a11 + a12 < a22 + max(a21, a22): the front can retreat without a matching advance.
  const auto p = P("1 0 3 2");
  bool positive = false;
  for (const auto& r : enumerate_front_contexts(p, 6)) positive = positive || r.drift.sign() > 0;
  EXPECT_TRUE(positive);
}

TEST(LineProcess, FrozenEndsAndConsistentKinds) {
  const auto p = P("4 9 10 0");
  LineProcess proc(W("2212112122121121"), p, 3);
  const Word start = proc.cells();
  for (int k = 0; k < 300; ++k) {
    if (!proc.step()) break;
    const auto& c = proc.cells();
    EXPECT_EQ(c[0], start[0]);
    EXPECT_EQ(c[1], start[1]);
    EXPECT_EQ(c[c.size() - 1], start[c.size() - 1]);
    EXPECT_EQ(c[c.size() - 2], start[c.size() - 2]);
    const ScoreTable sc(p);
    std::size_t active = 0;
    for (std::size_t i = 2; i + 2 < c.size(); ++i) {
      EXPECT_EQ(proc.kind(i), segment_flip_kind(c, i, sc));
      active += proc.kind(i) != FlipKind::kZero;
    }
    EXPECT_EQ(active, proc.active_count());
  }
  EXPECT_ANY_THROW(LineProcess(W("1212"), p, 1));
}

TEST(LineProcess, DeterministicPerSeed) {
  const auto p = P("0 1 1 0");
  LineProcess a(W("22121121212211"), p, 5), b(W("22121121212211"), p, 5);
  for (int k = 0; k < 100; ++k) {
    const auto e = a.step(), f = b.step();
    ASSERT_EQ(e.has_value(), f.has_value());
    if (!e) break;
    EXPECT_EQ(e->site, f->site);
    EXPECT_EQ(e->time, f->time);
    EXPECT_EQ(e->new_strategy, f->new_strategy);
  }
}

TEST(RunHitting, Terminates) {
  const auto p = P("3 5 4 0");
  for (auto ext : {Exterior::kAllTwo, Exterior::kAlternating, Exterior::kPairs}) {
    for (std::uint64_t s = 1; s <= 20; ++s) EXPECT_NE(run_hitting(p, ext, 100, s), HittingOutcome::kStalled);
  }
  EXPECT_EQ(run_hitting(p, Exterior::kAllOne, 20, 1), HittingOutcome::kReachedN);
  EXPECT_ANY_THROW(run_hitting(p, Exterior::kAllTwo, 0, 1));
}

TEST(RunHitting, FartherStartReachesMoreOften) {
  const auto p = P("3 5 4 0");
  auto freq = [&](std::int64_t x0) {
    std::int64_t k = 0;
    for (std::uint64_t s = 1; s <= 2000; ++s) k += run_hitting(p, Exterior::kAlternating, 20, s, {.x0 = x0}) == HittingOutcome::kReachedN;
    return static_cast<double>(k) / 2000.0;
  };
  const double f0 = freq(0), f5 = freq(5), f10 = freq(10);
  const double bound = 1.0 - golden_power(-1).to_double();
  EXPECT_TRUE(stats::passes_lower(f0, bound, 2000));
  EXPECT_LE(f0, f5 + 0.03);
  EXPECT_LE(f5, f10 + 0.03);
  EXPECT_GT(f10, 1.0 - golden_power(-10).to_double() - 3 * stats::sigma_at(0.99, 2000));
}

TEST(IntervalSurvival, TrivialExterior) {
  const auto p = P("3 5 4 0");
  EXPECT_EQ(interval_survival(p, 1, Exterior::kAllOne, 20, 1), SurvivalOutcome::kIntactEscape);
  EXPECT_ANY_THROW(interval_survival(p, 0, Exterior::kAllTwo, 20, 1));
  EXPECT_ANY_THROW(interval_survival(p, 5, Exterior::kAllTwo, 5, 1));
}

TEST(IntervalSurvival, BoundHoldsForTwoIntervalsUnderGoldTwo) {
  const auto p = P("3 5 4 0").swapped();
  ASSERT_TRUE(region_predicates(p, NeighborhoodSpec(1, 1)).gold2);
  const double bound = (7.0 - 3.0 * std::sqrt(5.0)) / 2.0;
  for (auto ext : {Exterior::kAllTwo, Exterior::kAlternating, Exterior::kPairs}) {
    std::int64_t k = 0, k_one = 0;
    for (std::uint64_t s = 1; s <= 3000; ++s) {
      k += interval_survival(p, 1, ext, 20, s, {.core = Strategy::kTwo}) == SurvivalOutcome::kIntactEscape;
      k_one += interval_survival(P("3 5 4 0"), 1, ext, 20, s) == SurvivalOutcome::kIntactEscape;
    }
    const double f = k / 3000.0, f1 = k_one / 3000.0;
    EXPECT_TRUE(stats::passes_lower(f, bound, 3000)) << to_string(ext) << " " << f;
    EXPECT_NEAR(f, f1, 4 * std::sqrt(2 * 0.25 / 3000.0)) << to_string(ext);
  }
}

TEST(Blocks, Examples) {
  EXPECT_EQ(decompose_blocks(ring({1, 1, 1, 1, 1})).blocks.size(), 1U);
  EXPECT_EQ(decompose_blocks(ring({1, 2, 1, 2, 1, 2})).blocks.size(), 6U);
  const auto d = decompose_blocks(W("2211122"));
  ASSERT_EQ(d.blocks.size(), 3U);
  EXPECT_EQ(d.blocks[0], (Block{Strategy::kTwo, 0, 2}));
  EXPECT_EQ(d.blocks[1], (Block{Strategy::kOne, 2, 3}));
  EXPECT_EQ(d.blocks[2], (Block{Strategy::kTwo, 5, 2}));
}

TEST(Blocks, RecomposeAndInterfaceCount) {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = 5 + static_cast<int>(g() % 20);
    const auto t = Torus::make(1, 1, {L});
    std::vector<Strategy> cells(static_cast<std::size_t>(L));
    for (auto& c : cells) c = g() % 3 ? Strategy::kOne : Strategy::kTwo;
    const Configuration xi(t, cells);
    const auto d = decompose_blocks(xi);
    EXPECT_EQ(recompose(d), cells);
    EXPECT_EQ(decompose_blocks(cells).blocks.size() > 0, true);
    EXPECT_EQ(recompose(decompose_blocks(cells)), cells);
    const auto interfaces = interface_density(xi) * Rational(L);
    if (interfaces == Rational(0)) EXPECT_EQ(d.blocks.size(), 1U);
    else EXPECT_EQ(Rational(static_cast<std::int64_t>(d.blocks.size())), interfaces);
    for (std::size_t i = 1; i < d.blocks.size(); ++i) EXPECT_NE(d.blocks[i].type, d.blocks[i - 1].type);
  }
}

TEST(Patterns, StabilityExamples) {
  const auto p = P("3 0 2 2");
  EXPECT_TRUE(is_stable_pattern({W("222"), k11, k11}, p).stable);
  EXPECT_FALSE(is_stable_pattern({W("11"), k22, k22}, p).stable);
  const auto r = is_stable_pattern({W("111"), k22, k22}, p);
  EXPECT_EQ(r.flip_rates[0], Rational(0));
  EXPECT_TRUE(r.stable);
  EXPECT_ANY_THROW(is_stable_pattern({Word{}, k22, k22}, p));
}

TEST(Patterns, PairOfOnesUnstableWheneverTwosEarnAtLeastAsMuch) {
  std::mt19937_64 g(4);
  std::uniform_int_distribution<int> num(-6, 6);
  int checked = 0;
  while (checked < 300) {
    const PayoffMatrix p{Rational(num(g)), Rational(num(g)), Rational(num(g)), Rational(num(g))};
    if (p.a11 + p.a12 > p.a21 + p.a22) continue;
    ++checked;
    const auto r = is_stable_pattern({W("11"), k22, k22}, p);
    EXPECT_GT(r.flip_rates[0].sign(), 0) << p.to_string();
    EXPECT_GT(r.flip_rates[1].sign(), 0) << p.to_string();
  }
}

TEST(Patterns, ClaimsHoldWhereAsserted) {
  for (const char* s : {"3 0 2 2", "4 0 9/2 1", "4 0 9/2 3", "5 1 3 1"}) {
    for (const auto& c : pattern_claims(P(s))) {
      if (c.asserted) EXPECT_TRUE(c.holds) << s << ": " << c.name;
    }
  }
  int asserted1 = 0, asserted2 = 0;
  for (const auto& c : pattern_claims(P("3 0 2 2"))) asserted1 += c.asserted;
  for (const auto& c : pattern_claims(P("4 0 9/2 1"))) asserted2 += c.asserted;
  EXPECT_GE(asserted1, 7);
  EXPECT_GE(asserted2, 6);
  for (const auto& c : pattern_claims(P("4 9 10 0"))) EXPECT_FALSE(c.asserted) << c.name;
}

TEST(ForbiddenTransitions, CaseTwo) {
  const auto rep = forbidden_transition_check(P("4 0 9/2 3"));
  EXPECT_TRUE(rep.claim1_asserted);
  EXPECT_TRUE(rep.passes());
  for (const auto& c : rep.claim1) EXPECT_TRUE(c.holds) << c.name;
  const auto gold = forbidden_transition_check(P("5 1 3 1"));
  EXPECT_FALSE(gold.claim1_asserted);
  EXPECT_FALSE(gold.claim2_asserted);
}

TEST(ForbiddenTransitions, FailOutsideTheirRegion) {
  const auto rep = forbidden_transition_check(P("4 9 10 0"));
  bool any_fail = false;
  for (const auto& c : rep.claim1) any_fail = any_fail || !c.holds;
  EXPECT_TRUE(any_fail);
}

TEST(AbsorbingChain, Examples) {
  EXPECT_TRUE(absorbing_chain_verify(10, P("3 0 2 2")).absorbing);
  EXPECT_TRUE(absorbing_chain_verify(10, P("4 0 9/2 3")).absorbing);
  const auto open = absorbing_chain_verify(10, P("4 9 10 0"));
  EXPECT_FALSE(open.absorbing);
  ASSERT_TRUE(open.counterexample.has_value());
  EXPECT_TRUE(witness_path(open, *open.counterexample).empty());
  EXPECT_ANY_THROW(absorbing_chain_verify(21, P("3 0 2 2")));
}

TEST(AbsorbingChain, WitnessPathsUsePositiveRateFlips) {
  const auto p = P("3 0 2 2");
  const auto rep = absorbing_chain_verify(8, p);
  ASSERT_TRUE(rep.absorbing);
  std::mt19937_64 g(2);
  for (int trial = 0; trial < 50; ++trial) {
    Word start(8);
    for (auto& c : start) c = g() & 1U ? Strategy::kOne : Strategy::kTwo;
    const auto path = witness_path(rep, start);
    ASSERT_FALSE(path.empty());
    EXPECT_EQ(path.front(), start);
    for (std::size_t k = 1; k < path.size(); ++k) {
      std::size_t diff = 0, at = 0;
      for (std::size_t i = 0; i < 8; ++i) {
        if (path[k][i] != path[k - 1][i]) ++diff, at = i;
      }
      ASSERT_EQ(diff, 1U);
      EXPECT_GT(is_stable_pattern({path[k - 1], k22, k22}, p).flip_rates[at].sign(), 0);
    }
    EXPECT_TRUE(is_stable_pattern({path.back(), k22, k22}, p).stable);
  }
}

TEST(OpenRegion, LengthRates) {
  const auto p = P("4 9 10 0");
  for (int ell = 3; ell <= 20; ++ell) {
    const auto r = interval_length_rates(p, ell);
    EXPECT_EQ(r.grow, r.shrink) << ell;
    EXPECT_GT(r.grow.sign(), 0);
    EXPECT_EQ(r.other, Rational(0));
  }
  const auto r2 = interval_length_rates(p, 2);
  EXPECT_EQ(r2.shrink, Rational(0));
  EXPECT_GT(r2.grow.sign(), 0);
}

TEST(OpenRegion, PatternExamples) {
  const auto p = P("4 9 10 0");
  EXPECT_GT(segment_flip_rate(W("22211211111"), 4, p).sign(), 0);
  // two runs of 1s separated by a single 2 merge at rate one
  EXPECT_EQ(segment_flip_rate(W("22111211122"), 5, p), Rational(1));
}

TEST(OpenRegion, FluctuationRun) {
  const auto r = fluctuation_run(P("4 9 10 0"), 10, 5000, 1);
  EXPECT_EQ(r.down_at_2, 0);
  EXPECT_EQ(r.irregular, 0);
  EXPECT_FALSE(r.truncated);
  EXPECT_GT(r.up + r.down, 4000);
  EXPECT_GT(stats::chi2_1dof_pvalue(stats::symmetry_chi2(r.up, r.down)), 0.001);
}
