#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dbf/simulation.hpp"

namespace dbf {

/// A {0,1} indicator per torus site. Used both for the 1-center field and
/// for bootstrap percolation configurations.
struct SiteField {
  std::shared_ptr<const Torus> torus;
  std::vector<std::uint8_t> bits;

  SiteField(std::shared_ptr<const Torus> t, bool fill)
      : torus(std::move(t)), bits(static_cast<std::size_t>(torus->size()), fill ? 1 : 0) {}

  [[nodiscard]] bool operator[](std::int64_t x) const { return bits[static_cast<std::size_t>(x)] != 0; }
  [[nodiscard]] std::int64_t count() const {
    std::int64_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
  [[nodiscard]] bool full() const { return count() == torus->size(); }
  /// Pointwise inclusion: this is a subset of `other`.
  [[nodiscard]] bool subset_of(const SiteField& other) const {
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] && !other.bits[i]) return false;
    }
    return true;
  }
  friend bool operator==(const SiteField& a, const SiteField& b) { return a.bits == b.bits; }
};

using CenterField = SiteField;
using BootstrapConfig = SiteField;

/// eta(x) = 1 iff x and all of its neighbors follow strategy 1.
inline CenterField extract_centers(const Configuration& xi) {
  CenterField eta(xi.torus_ptr(), false);
  for (std::int64_t x = 0; x < xi.size(); ++x) {
    eta.bits[x] = xi[x] == Strategy::kOne && count_type1_neighbors(x, xi) == xi.torus().N();
  }
  return eta;
}

namespace detail {

/// Nearest neighbors x - e_i and x + e_i for every direction i.
inline std::vector<std::int64_t> axis_neighbors(const Torus& t, std::int64_t x) {
  std::vector<std::int64_t> out;
  std::vector<int> delta(static_cast<std::size_t>(t.d()), 0);
  for (int i = 0; i < t.d(); ++i) {
    delta[i] = -1;
    out.push_back(t.shift(x, delta));
    delta[i] = 1;
    out.push_back(t.shift(x, delta));
    delta[i] = 0;
  }
  return out;
}

}  // namespace detail

/// One synchronous step: an empty site becomes occupied when, in every
/// direction, at least one of its two nearest neighbors is occupied.
inline BootstrapConfig bootstrap_step(const BootstrapConfig& zeta) {
  const Torus& t = *zeta.torus;
  BootstrapConfig next = zeta;
  for (std::int64_t x = 0; x < t.size(); ++x) {
    if (zeta[x]) continue;
    const auto nb = detail::axis_neighbors(t, x);
    bool all_dirs = true;
    for (int i = 0; i < t.d() && all_dirs; ++i) all_dirs = zeta[nb[2 * i]] || zeta[nb[2 * i + 1]];
    next.bits[x] = all_dirs;
  }
  return next;
}

struct BootstrapLimit {
  BootstrapConfig field;
  std::int64_t steps = 0;  // steps until nothing changes
};

/// Iterates to the fixed point; monotonicity bounds the number of steps by the site count.
inline BootstrapLimit bootstrap_limit(const BootstrapConfig& zeta0) {
  BootstrapLimit out{zeta0, 0};
  while (true) {
    auto next = bootstrap_step(out.field);
    if (next == out.field) return out;
    out.field = std::move(next);
    ++out.steps;
  }
}

inline BootstrapConfig sample_site_field(double density, std::shared_ptr<const Torus> torus, std::uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  Rng rng(derive_seed(seed, 0xb007));
  BootstrapConfig z(std::move(torus), false);
  for (auto& b : z.bits) b = rng.bernoulli(density);
  return z;
}

struct CoupledInitials {
  Configuration xi0;     // product measure, density rho of strategy 1
  BootstrapConfig zeta0;  // product measure, density rho^(N+1) of occupied sites
};

/// Independent product samples at densities rho and rho^(N+1).
inline CoupledInitials coupled_initials(double rho, const std::shared_ptr<const Torus>& torus, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  const double dens = std::pow(rho, static_cast<double>(torus->N() + 1));
  return {sample_product_measure(rho, torus, seed), sample_site_field(dens, torus, seed)};
}

// ---------------------------------------------------------------------------
// Center monotonicity monitoring

struct CenterViolation {
  double time = 0.0;
  std::int64_t site = 0;  // the center that was lost
};

struct CenterReport {
  std::vector<CenterViolation> violations;
  std::uint64_t flips_checked = 0;
  [[nodiscard]] bool clean() const { return violations.empty(); }
};

/// Replays the flip log of a trajectory and reports every site that stops
/// being a 1-center. With `full_recompute` the whole center field is rebuilt
/// after every flip; otherwise only the M-ball of the flipped site is checked.
inline CenterReport monitor_center_monotonicity(const Trajectory& tr, bool full_recompute = false) {
  CenterReport rep;
  Configuration xi = tr.initial;
  const Torus& t = xi.torus();
  CenterField eta = extract_centers(xi);
  for (const auto& e : tr.log) {
    if (!e.flipped()) continue;
    ++rep.flips_checked;
    xi.set(e.site, e.new_strategy);
    if (full_recompute) {
      CenterField next = extract_centers(xi);
      for (std::int64_t y = 0; y < t.size(); ++y) {
        if (eta[y] && !next[y]) rep.violations.push_back({e.time, y});
      }
      eta = std::move(next);
    } else {
      for (auto y : t.ball(e.site, t.M())) {
        const bool now = xi[y] == Strategy::kOne && count_type1_neighbors(y, xi) == t.N();
        if (eta[y] && !now) rep.violations.push_back({e.time, y});
        eta.bits[y] = now;
      }
    }
  }
  return rep;
}

/// Live form of the monitor, usable as a Simulator observer without keeping a log.
class CenterMonitor {
 public:
  void operator()(const Simulator& sim, const EventRecord& e) {
    if (!e.flipped() || e.old_strategy != Strategy::kOne) return;  // 2 -> 1 flips never destroy centers
    const auto& xi = sim.state();
    const Torus& t = xi.torus();
    // Before the flip, y was a center iff its closed neighborhood was all 1s.
    if (sim.type1_neighbors(e.site) == t.N()) violations_.push_back({e.time, e.site});
    for (auto y : t.neighbors_of(e.site)) {
      if (xi[y] == Strategy::kOne && sim.type1_neighbors(y) == t.N() - 1) violations_.push_back({e.time, y});
    }
  }
  [[nodiscard]] const std::vector<CenterViolation>& violations() const { return violations_; }

 private:
  std::vector<CenterViolation> violations_;
};

struct FillingCount {
  std::int64_t trials = 0;    // sites x not in eta_s with a center on at least one side in every direction
  std::int64_t failures = 0;  // of those, x still not in eta_later
};

/// Counts how often the growth step of the center field fails to happen
/// between two snapshots of the same run.
inline FillingCount center_filling_count(const Configuration& xi_s, const Configuration& xi_later) {
  const auto eta_s = extract_centers(xi_s);
  const auto eta_l = extract_centers(xi_later);
  const Torus& t = xi_s.torus();
  FillingCount fc;
  for (std::int64_t x = 0; x < t.size(); ++x) {
    if (eta_s[x]) continue;
    const auto nb = detail::axis_neighbors(t, x);
    bool cond = true;
    for (int i = 0; i < t.d() && cond; ++i) cond = eta_s[nb[2 * i]] || eta_s[nb[2 * i + 1]];
    if (!cond) continue;
    ++fc.trials;
    fc.failures += !eta_l[x];
  }
  return fc;
}

inline void write_site_field(std::ostream& os, const SiteField& f) {
  dbf::detail::write_grid_header(os, *f.torus);
  dbf::detail::write_digits(os, *f.torus, f.torus->size(), [&](std::int64_t x) { return f[x] ? 1 : 0; });
}

inline SiteField read_site_field(std::istream& is) {
  auto t = dbf::detail::read_grid_header(is);
  const auto digits = dbf::detail::read_digits(is, t->size());
  SiteField f(t, false);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] > 1) throw std::runtime_error("site field cells must be 0 or 1");
    f.bits[i] = static_cast<std::uint8_t>(digits[i]);
  }
  return f;
}

}  // namespace dbf
