#include <gtest/gtest.h>

#include <cmath>

#include "dbf/mean_field.hpp"

using namespace dbf;
using namespace dbf::mean_field;

namespace {

DerivedParams D(int a1n, int a1d, int a2n, int a2d) { return {Rational(a1n, a1d), Rational(a2n, a2d)}; }

double gap(const DerivedParams& dp, double u) { return dp.a1.to_double() * u - dp.a2.to_double() * (1.0 - u); }

// RK4 on the active smooth branch; a step that changes the sign of the payoff
// gap ends on the switching point, where the flow stays.
double integrate(const DerivedParams& dp, double u0, double t_end, double dt = 1e-4) {
  auto f = [&](double u, int s) { return s > 0 ? 1.0 - u : (s < 0 ? -u : 0.0); };
  double u = u0;
  const long steps = std::lround(t_end / dt);
  const double g0 = gap(dp, u0);
  int s = (g0 > 0) - (g0 < 0);
  for (long k = 0; k < steps && s != 0; ++k) {
    const double k1 = f(u, s), k2 = f(u + dt / 2 * k1, s), k3 = f(u + dt / 2 * k2, s), k4 = f(u + dt * k3, s);
    const double next = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    const double g = gap(dp, next);
    if ((g > 0) - (g < 0) != s) {
      u = dp.a2.to_double() / (dp.a1.to_double() + dp.a2.to_double());
      s = 0;
    } else {
      u = next;
    }
  }
  return u;
}

}  // namespace

TEST(Drift, Examples) {
  EXPECT_DOUBLE_EQ(drift(0.5, D(1, 1, -1, 1)), 0.5);
  EXPECT_EQ(drift(Rational(1, 2), D(1, 1, 1, 1)), Rational(0));
  EXPECT_EQ(drift(Rational(1, 5), D(-1, 1, -1, 1)), Rational(4, 5));
  EXPECT_EQ(drift(Rational(4, 5), D(-1, 1, -1, 1)), Rational(-4, 5));
  EXPECT_ANY_THROW(drift(1.5, D(1, 1, 1, 1)));
}

TEST(Drift, DisplayedOrientationReversesSigns) {
  const auto dp = D(1, 1, -1, 1);
  EXPECT_DOUBLE_EQ(drift(0.5, dp, Orientation::kDisplayed), -0.5);
  EXPECT_EQ(drift(Rational(1, 5), D(-1, 1, -1, 1), Orientation::kDisplayed), Rational(-1, 5));
}

TEST(FixedPoints, Examples) {
  EXPECT_EQ(*fixed_points(D(1, 1, 1, 1)).e_star, Rational(1, 2));
  const auto fp = fixed_points(D(-1, 1, -2, 1));
  EXPECT_EQ(*fp.e_star, Rational(2, 3));
  EXPECT_TRUE(fp.interior);
  EXPECT_FALSE(fixed_points(D(1, 1, -1, 1)).e_star.has_value());
  EXPECT_FALSE(fixed_points(D(2, 1, -1, 1)).interior);
  EXPECT_EQ(fixed_points(D(2, 1, -1, 1)).e1, Rational(1));
  EXPECT_EQ(fixed_points(D(2, 1, -1, 1)).e2, Rational(0));
}

TEST(ClassifyOutcome, Examples) {
  EXPECT_EQ(classify_outcome(D(2, 1, -1, 1), Rational(1, 100)).outcome, Outcome::kStrategy1Wins);
  for (const auto& u0 : {Rational(1, 10), Rational(1, 2), Rational(9, 10)}) {
    const auto c = classify_outcome(D(-1, 1, -1, 1), u0);
    EXPECT_EQ(c.outcome, Outcome::kCoexists);
    EXPECT_DOUBLE_EQ(c.limit, 0.5);
  }
  EXPECT_EQ(classify_outcome(D(1, 1, 1, 1), Rational(2, 5)).outcome, Outcome::kStrategy2Wins);
  EXPECT_EQ(classify_outcome(D(1, 1, 1, 1), Rational(3, 5)).outcome, Outcome::kStrategy1Wins);
  EXPECT_EQ(classify_outcome(D(1, 1, 1, 1), Rational(1, 2)).outcome, Outcome::kStays);
  EXPECT_TRUE(classify_outcome(D(0, 1, 1, 1), Rational(1, 2)).boundary);
  EXPECT_ANY_THROW(classify_outcome(D(1, 1, 1, 1), Rational(0)));
  EXPECT_ANY_THROW(classify_outcome(D(1, 1, 1, 1), Rational(1)));
}

TEST(ClassifyOutcome, SelfishIsTheOnlyUnbeatableStrategy) {
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      if (i == 0 || j == 0) continue;
      const auto dp = D(i, 2, j, 3);
      bool always1 = true;
      for (int k = 1; k < 20; ++k) always1 = always1 && classify_outcome(dp, Rational(k, 20)).outcome == Outcome::kStrategy1Wins;
      EXPECT_EQ(always1, i > 0 && j < 0) << i << " " << j;
    }
  }
}

TEST(Solve, Examples) {
  const auto dp = D(-1, 1, -1, 1);
  for (double t : {0.0, 0.1, 0.3, std::log(1.6) - 1e-9}) EXPECT_NEAR(solve(dp, Rational(1, 5), t), 1 - 0.8 * std::exp(-t), 1e-12);
  for (double t : {0.5, 1.0, 10.0}) EXPECT_DOUBLE_EQ(solve(dp, Rational(1, 5), t), 0.5);
  EXPECT_DOUBLE_EQ(solve(D(1, 1, 1, 1), Rational(1, 2), 7.0), 0.5);
  EXPECT_NEAR(solve(D(1, 1, -1, 1), Rational(1, 2), 60.0), 1.0, 1e-12);
  EXPECT_ANY_THROW(solve(dp, Rational(1, 2), -1.0));
}

TEST(Solve, AgreesWithSmallStepIntegrator) {
  for (int i : {-3, -1, 2, 5}) {
    for (int j : {-4, -1, 1, 3}) {
      const auto dp = D(i, 2, j, 2);
      for (double u0 : {0.1, 0.35, 0.5, 0.9}) {
        for (double t : {0.5, 2.0, 7.0, 20.0}) EXPECT_NEAR(solve(dp, u0, t), integrate(dp, u0, t), 1e-6) << i << " " << j << " " << u0 << " " << t;
      }
    }
  }
}

TEST(Solve, StaysInUnitInterval) {
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      for (double u0 : {0.0, 0.2, 0.7, 1.0}) {
        for (double t : {0.0, 0.5, 3.0, 40.0}) {
          const double u = solve(D(i, 1, j, 1), u0, t);
          EXPECT_GE(u, 0.0);
          EXPECT_LE(u, 1.0);
        }
      }
    }
  }
}

TEST(Series, GridAndValues) {
  const auto s = series(D(-1, 1, -1, 1), Rational(1, 5), 1.0, 0.25);
  ASSERT_EQ(s.size(), 5U);
  EXPECT_DOUBLE_EQ(s.back().first, 1.0);
  EXPECT_DOUBLE_EQ(s.front().second, 0.2);
  EXPECT_ANY_THROW(series(D(1, 1, 1, 1), Rational(1, 2), 1.0, 0.0));
}
