#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dbf::stats {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson(std::int64_t successes, std::int64_t trials, double z = kZ95) {
  if (trials <= 0 || successes < 0 || successes > trials) throw std::invalid_argument("bad binomial counts");
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) iv.lower = 0.0;
  if (successes == trials) iv.upper = 1.0;
  return iv;
}

/// Binomial standard error at probability p.
inline double sigma_at(double p, std::int64_t trials) {
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

/// One-sided lower gate: estimate >= bound - k sigma.
inline bool passes_lower(double estimate, double bound, std::int64_t trials, double k = 3.0) {
  return estimate >= bound - k * sigma_at(bound, trials);
}

/// One-sided upper gate: estimate <= bound + k sigma.
inline bool passes_upper(double estimate, double bound, std::int64_t trials, double k = 3.0) {
  return estimate <= bound + k * sigma_at(bound, trials);
}

/// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi2_1dof_pvalue(double x) { return x <= 0 ? 1.0 : std::erfc(std::sqrt(x / 2.0)); }

/// Goodness of fit of two counts against equal probabilities.
inline double symmetry_chi2(std::int64_t a, std::int64_t b) {
  const double n = static_cast<double>(a + b);
  if (n == 0) return 0.0;
  const double d = static_cast<double>(a - b);
  return d * d / n;
}

/// Goodness of fit of a count against a Bernoulli(p) expectation over n trials.
inline double bernoulli_chi2(std::int64_t hits, std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0 || p >= 1.0) throw std::invalid_argument("chi-square needs n > 0 and 0 < p < 1");
  const double e1 = p * static_cast<double>(n), e0 = static_cast<double>(n) - e1;
  const double d1 = static_cast<double>(hits) - e1;
  return d1 * d1 / e1 + d1 * d1 / e0;
}

}  // namespace dbf::stats
