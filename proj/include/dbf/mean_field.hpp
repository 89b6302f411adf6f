#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dbf/payoff.hpp"

namespace dbf::mean_field {

/// Which way the well-mixed flux points.
///
/// kFlux: du1/dt = u2 when strategy 1 earns more, -u1 when it earns less.
/// This reproduces the stated global stability picture (selfish beats
/// altruistic, altruists coexist, selfish pairs are bistable).
/// kDisplayed: the reduced equation exactly as printed, with the signs the
/// other way round. Kept for comparison only.
enum class Orientation { kFlux, kDisplayed };

namespace detail {

/// Sign of payoff_1 - payoff_2 = a1 u1 - a2 u2.
inline int payoff_gap_sign(const DerivedParams& dp, const Rational& u1) {
  return (dp.a1 * u1 - dp.a2 * (Rational(1) - u1)).sign();
}

inline int payoff_gap_sign(const DerivedParams& dp, double u1) {
  const double g = dp.a1.to_double() * u1 - dp.a2.to_double() * (1.0 - u1);
  return (g > 0) - (g < 0);
}

/// +1 when u1 increases, -1 when it decreases, 0 at rest.
template <class U>
int direction(const DerivedParams& dp, const U& u1, Orientation o) {
  const int s = payoff_gap_sign(dp, u1);
  return o == Orientation::kFlux ? s : -s;
}

}  // namespace detail

inline double drift(double u1, const DerivedParams& dp, Orientation o = Orientation::kFlux) {
  if (!(u1 >= 0.0 && u1 <= 1.0)) throw std::invalid_argument("u1 must lie in [0, 1]");
  const int dir = detail::direction(dp, u1, o);
  return dir > 0 ? 1.0 - u1 : (dir < 0 ? -u1 : 0.0);
}

/// Exact drift for rational u1.
inline Rational drift(const Rational& u1, const DerivedParams& dp, Orientation o = Orientation::kFlux) {
  if (u1 < Rational(0) || u1 > Rational(1)) throw std::invalid_argument("u1 must lie in [0, 1]");
  const int dir = detail::direction(dp, u1, o);
  return dir > 0 ? Rational(1) - u1 : (dir < 0 ? -u1 : Rational(0));
}

struct FixedPoints {
  Rational e1{1};
  Rational e2{0};
  std::optional<Rational> e_star;  // a2 / (a1 + a2), undefined when a1 + a2 = 0
  bool interior = false;           // 0 < e_star < 1
};

inline FixedPoints fixed_points(const DerivedParams& dp) {
  FixedPoints fp;
  const Rational s = dp.a1 + dp.a2;
  if (s.sign() != 0) {
    fp.e_star = dp.a2 / s;
    fp.interior = *fp.e_star > Rational(0) && *fp.e_star < Rational(1);
  }
  return fp;
}

enum class Outcome { kStrategy1Wins, kStrategy2Wins, kCoexists, kStays };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kStrategy1Wins: return "strategy1-wins";
    case Outcome::kStrategy2Wins: return "strategy2-wins";
    case Outcome::kCoexists: return "coexists-at-e*";
    case Outcome::kStays: return "stays-at-u0";
  }
  return "?";
}

struct Classification {
  Outcome outcome = Outcome::kStays;
  double limit = 0.0;     // lim u1(t)
  bool boundary = false;  // a neutral strategy (a1 = 0 or a2 = 0)
};

/// Long-time behavior from an interior starting frequency.
inline Classification classify_outcome(const DerivedParams& dp, const Rational& u0,
                                       Orientation o = Orientation::kFlux) {
  if (u0 <= Rational(0) || u0 >= Rational(1)) {
    throw std::invalid_argument("initial frequency must lie strictly inside (0, 1)");
  }
  Classification c;
  c.boundary = dp.a1.sign() == 0 || dp.a2.sign() == 0;
  const auto fp = fixed_points(dp);
  const int dir = detail::direction(dp, u0, o);
  if (dir == 0) {
    const bool attracting = fp.e_star && *fp.e_star == u0 &&
                            detail::direction(dp, u0 / Rational(2), o) > 0 &&
                            detail::direction(dp, (u0 + Rational(1)) / Rational(2), o) < 0;
    c.outcome = attracting ? Outcome::kCoexists : Outcome::kStays;
    c.limit = u0.to_double();
  } else if (dir > 0) {
    if (fp.e_star && *fp.e_star > u0 && *fp.e_star < Rational(1)) {
      c.outcome = Outcome::kCoexists;
      c.limit = fp.e_star->to_double();
    } else {
      c.outcome = Outcome::kStrategy1Wins;
      c.limit = 1.0;
    }
  } else {
    if (fp.e_star && *fp.e_star < u0 && *fp.e_star > Rational(0)) {
      c.outcome = Outcome::kCoexists;
      c.limit = fp.e_star->to_double();
    } else {
      c.outcome = Outcome::kStrategy2Wins;
      c.limit = 0.0;
    }
  }
  return c;
}

namespace detail {

/// Closed form given the initial direction; trajectories that meet e_star stop there.
inline double solve_from(int dir, double u0, std::optional<double> e_star, double t) {
  if (dir == 0) return u0;
  if (dir > 0) {
    if (e_star && *e_star > u0 && *e_star < 1.0) {
      const double hit = std::log((1.0 - u0) / (1.0 - *e_star));
      if (t >= hit) return *e_star;
    }
    return 1.0 - (1.0 - u0) * std::exp(-t);
  }
  if (e_star && *e_star < u0 && *e_star > 0.0) {
    const double hit = std::log(u0 / *e_star);
    if (t >= hit) return *e_star;
  }
  return u0 * std::exp(-t);
}

inline std::optional<double> e_star_double(const DerivedParams& dp) {
  const auto fp = fixed_points(dp);
  if (!fp.e_star) return std::nullopt;
  return fp.e_star->to_double();
}

}  // namespace detail

/// u1(t) in closed form; the regime is decided exactly from the rational start.
inline double solve(const DerivedParams& dp, const Rational& u0, double t, Orientation o = Orientation::kFlux) {
  if (u0 < Rational(0) || u0 > Rational(1)) throw std::invalid_argument("u1(0) must lie in [0, 1]");
  if (t < 0) throw std::invalid_argument("time must be non-negative");
  return detail::solve_from(detail::direction(dp, u0, o), u0.to_double(), detail::e_star_double(dp), t);
}

inline double solve(const DerivedParams& dp, double u0, double t, Orientation o = Orientation::kFlux) {
  if (!(u0 >= 0.0 && u0 <= 1.0)) throw std::invalid_argument("u1(0) must lie in [0, 1]");
  if (t < 0) throw std::invalid_argument("time must be non-negative");
  return detail::solve_from(detail::direction(dp, u0, o), u0, detail::e_star_double(dp), t);
}

/// (t, u1) pairs on a uniform grid from 0 to horizon inclusive.
inline std::vector<std::pair<double, double>> series(const DerivedParams& dp, const Rational& u0, double horizon,
                                                     double dt, Orientation o = Orientation::kFlux) {
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  std::vector<std::pair<double, double>> out;
  const auto steps = static_cast<long>(std::floor(horizon / dt + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.emplace_back(t, solve(dp, u0, t, o));
  }
  return out;
}

}  // namespace dbf::mean_field
