#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbf/payoff.hpp"

namespace dbf {

/// Periodic d-dimensional box with a range-M sup-norm neighborhood.
///
/// Sites are indexed row-major (last coordinate fastest). Every side must be
/// at least 4M+1 so that the 2M-ball around any site, which is everything a
/// flip rate can depend on, contains no wrapped duplicates.
class Torus {
 public:
  Torus(NeighborhoodSpec ns, std::vector<int> sides) : ns_(ns), sides_(std::move(sides)) {
    if (static_cast<int>(sides_.size()) != ns_.d()) {
      throw std::invalid_argument("torus needs one side per dimension");
    }
    strides_.assign(sides_.size(), 1);
    std::int64_t total = 1;
    for (int k = ns_.d() - 1; k >= 0; --k) {
      if (sides_[k] < 4 * ns_.M() + 1) {
        throw std::invalid_argument("torus side " + std::to_string(sides_[k]) + " below 4M+1=" +
                                    std::to_string(4 * ns_.M() + 1));
      }
      strides_[k] = total;
      total *= sides_[k];
      if (total > (std::int64_t{1} << 31)) throw std::invalid_argument("torus too large");
    }
    size_ = total;
    build_offsets();
  }

  static std::shared_ptr<const Torus> make(int d, int M, std::vector<int> sides) {
    return std::make_shared<const Torus>(NeighborhoodSpec(d, M), std::move(sides));
  }
  static std::shared_ptr<const Torus> cube(int d, int M, int side) {
    return make(d, M, std::vector<int>(d, side));
  }

  [[nodiscard]] const NeighborhoodSpec& spec() const { return ns_; }
  [[nodiscard]] int d() const { return ns_.d(); }
  [[nodiscard]] int M() const { return ns_.M(); }
  [[nodiscard]] std::int64_t N() const { return ns_.N(); }
  [[nodiscard]] const std::vector<int>& sides() const { return sides_; }
  [[nodiscard]] std::int64_t size() const { return size_; }

  [[nodiscard]] std::vector<int> coords(std::int64_t site) const {
    std::vector<int> c(sides_.size());
    for (std::size_t k = 0; k < sides_.size(); ++k) {
      c[k] = static_cast<int>(site / strides_[k]);
      site %= strides_[k];
    }
    return c;
  }

  [[nodiscard]] std::int64_t index(std::span<const int> c) const {
    std::int64_t s = 0;
    for (std::size_t k = 0; k < sides_.size(); ++k) {
      int v = c[k] % sides_[k];
      if (v < 0) v += sides_[k];
      s += v * strides_[k];
    }
    return s;
  }

  /// Site reached from `site` by the displacement `delta`, wrapping periodically.
  [[nodiscard]] std::int64_t shift(std::int64_t site, std::span<const int> delta) const {
    auto c = coords(site);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += delta[k];
    return index(c);
  }

  /// Sites z != x with sup-distance <= M.
  [[nodiscard]] std::vector<std::int64_t> neighbors(std::int64_t site) const { return ball(site, ns_.M(), false); }

  /// All sites within sup-distance r (r <= 2M), optionally including the center.
  [[nodiscard]] std::vector<std::int64_t> ball(std::int64_t site, int r, bool include_center = true) const {
    const auto c = coords(site);
    std::vector<std::int64_t> out;
    std::vector<int> off(sides_.size(), -r);
    std::vector<int> tmp(sides_.size());
    while (true) {
      bool center = true;
      for (std::size_t k = 0; k < off.size(); ++k) {
        tmp[k] = c[k] + off[k];
        center = center && off[k] == 0;
      }
      if (!center || include_center) out.push_back(index(tmp));
      std::size_t k = off.size();
      while (k > 0) {
        --k;
        if (++off[k] <= r) break;
        off[k] = -r;
        if (k == 0) return out;
      }
    }
  }

  /// Precomputed neighbor sites (with wrapping), N per site.
  [[nodiscard]] std::span<const std::int32_t> neighbors_of(std::int64_t site) const {
    return {table_.data() + site * N(), static_cast<std::size_t>(N())};
  }

  friend bool operator==(const Torus& a, const Torus& b) { return a.ns_ == b.ns_ && a.sides_ == b.sides_; }

 private:
  void build_offsets() {
    table_.resize(static_cast<std::size_t>(size_ * N()));
    for (std::int64_t x = 0; x < size_; ++x) {
      const auto nb = neighbors(x);
      for (std::size_t j = 0; j < nb.size(); ++j) table_[x * N() + j] = static_cast<std::int32_t>(nb[j]);
    }
  }

  NeighborhoodSpec ns_;
  std::vector<int> sides_;
  std::vector<std::int64_t> strides_;
  std::int64_t size_ = 0;
  std::vector<std::int32_t> table_;
};

/// Strategy assignment on a torus.
class Configuration {
 public:
  Configuration(std::shared_ptr<const Torus> torus, Strategy fill)
      : torus_(std::move(torus)), cells_(static_cast<std::size_t>(torus_->size()), fill) {}
  Configuration(std::shared_ptr<const Torus> torus, std::vector<Strategy> cells)
      : torus_(std::move(torus)), cells_(std::move(cells)) {
    if (static_cast<std::int64_t>(cells_.size()) != torus_->size()) {
      throw std::invalid_argument("cell count does not match torus size");
    }
  }

  [[nodiscard]] const Torus& torus() const { return *torus_; }
  [[nodiscard]] const std::shared_ptr<const Torus>& torus_ptr() const { return torus_; }
  [[nodiscard]] std::int64_t size() const { return torus_->size(); }
  [[nodiscard]] Strategy operator[](std::int64_t x) const { return cells_[static_cast<std::size_t>(x)]; }
  void set(std::int64_t x, Strategy s) { cells_[static_cast<std::size_t>(x)] = s; }
  [[nodiscard]] const std::vector<Strategy>& cells() const { return cells_; }

  [[nodiscard]] std::int64_t count(Strategy s) const {
    std::int64_t n = 0;
    for (auto c : cells_) n += c == s;
    return n;
  }

  /// The same configuration with every label exchanged.
  [[nodiscard]] Configuration swapped() const {
    Configuration out = *this;
    for (auto& c : out.cells_) c = opposite(c);
    return out;
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return *a.torus_ == *b.torus_ && a.cells_ == b.cells_;
  }

 private:
  std::shared_ptr<const Torus> torus_;
  std::vector<Strategy> cells_;
};

/// 1D helper: builds a configuration on a ring of the given length (M=1 unless stated).
inline Configuration ring(std::initializer_list<int> digits, int M = 1) {
  auto t = Torus::make(1, M, {static_cast<int>(digits.size())});
  std::vector<Strategy> cells;
  for (int v : digits) cells.push_back(strategy_from_int(v));
  return {t, std::move(cells)};
}

inline std::int64_t count_type1_neighbors(std::int64_t x, const Configuration& xi) {
  std::int64_t n = 0;
  for (auto z : xi.torus().neighbors_of(x)) n += xi[z] == Strategy::kOne;
  return n;
}

/// Best-neighbor payoffs Phi_1, Phi_2 at x, on the integer kernel scale.
inline BestPayoffs best_payoffs(std::int64_t x, const Configuration& xi, const ScoreTable& scores) {
  BestPayoffs best;
  const auto N = xi.torus().N();
  for (auto z : xi.torus().neighbors_of(x)) {
    best.offer(xi[z], scores.score(xi[z], count_type1_neighbors(z, xi), N));
  }
  return best;
}

inline FlipKind flip_kind(std::int64_t x, const Configuration& xi, const ScoreTable& scores) {
  return best_payoffs(x, xi, scores).rate_away_from(xi[x]);
}

/// Rate of the flip away from xi(x): 1, 1/2 on an exact tie, or 0.
inline Rational flip_rate(std::int64_t x, const Configuration& xi, const PayoffMatrix& p) {
  return to_rational(flip_kind(x, xi, ScoreTable(p)));
}

/// True iff no site can ever flip from xi.
inline bool is_absorbed(const Configuration& xi, const PayoffMatrix& p) {
  const ScoreTable scores(p);
  for (std::int64_t x = 0; x < xi.size(); ++x) {
    if (flip_kind(x, xi, scores) != FlipKind::kZero) return false;
  }
  return true;
}

/// Fraction of sites x with xi(x) != xi(x-1), cyclically (d = 1 only).
inline Rational interface_density(const Configuration& xi) {
  if (xi.torus().d() != 1) throw std::invalid_argument("interface density is defined for d = 1 only");
  const auto L = xi.size();
  std::int64_t n = 0;
  for (std::int64_t x = 0; x < L; ++x) n += xi[x] != xi[(x + L - 1) % L];
  return {n, L};
}

struct RegionCounts {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  [[nodiscard]] std::int64_t minority() const { return std::min(n1, n2); }
  [[nodiscard]] std::int64_t total() const { return n1 + n2; }
};

inline RegionCounts region_counts(const Configuration& xi, std::span<const std::int64_t> sites) {
  RegionCounts rc;
  for (auto x : sites) {
    if (x < 0 || x >= xi.size()) throw std::out_of_range("region site outside torus");
    (xi[x] == Strategy::kOne ? rc.n1 : rc.n2)++;
  }
  return rc;
}

// ---------------------------------------------------------------------------
// Text format: header "d M side_1 ... side_d", then the cells row-major, one
// line per innermost row. Strategy configurations use digits 1/2; site fields
// (center and bootstrap snapshots) use 0/1.

namespace detail {

inline void write_grid_header(std::ostream& os, const Torus& t) {
  os << t.d() << ' ' << t.M();
  for (int s : t.sides()) os << ' ' << s;
  os << '\n';
}

inline std::shared_ptr<const Torus> read_grid_header(std::istream& is) {
  int d = 0, M = 0;
  if (!(is >> d >> M) || d < 1) throw std::runtime_error("configuration header must start with 'd M'");
  std::vector<int> sides(static_cast<std::size_t>(d));
  for (auto& s : sides) {
    if (!(is >> s)) throw std::runtime_error("configuration header is missing torus sides");
  }
  return std::make_shared<const Torus>(NeighborhoodSpec(d, M), sides);
}

template <class Digit>
void write_digits(std::ostream& os, const Torus& t, std::int64_t n, Digit digit) {
  const int row = t.sides().back();
  for (std::int64_t x = 0; x < n; ++x) {
    os << digit(x);
    if ((x + 1) % row == 0) os << '\n';
  }
}

inline std::vector<int> read_digits(std::istream& is, std::int64_t n) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  char c = 0;
  while (static_cast<std::int64_t>(out.size()) < n && is.get(c)) {
    if (c >= '0' && c <= '9') out.push_back(c - '0');
    else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
      throw std::runtime_error(std::string("unexpected character in configuration body: ") + c);
    }
  }
  if (static_cast<std::int64_t>(out.size()) != n) throw std::runtime_error("configuration body is truncated");
  return out;
}

}  // namespace detail

inline void write_configuration(std::ostream& os, const Configuration& xi) {
  detail::write_grid_header(os, xi.torus());
  detail::write_digits(os, xi.torus(), xi.size(), [&](std::int64_t x) { return to_int(xi[x]); });
}

inline std::string to_text(const Configuration& xi) {
  std::ostringstream os;
  write_configuration(os, xi);
  return os.str();
}

inline Configuration read_configuration(std::istream& is) {
  auto t = detail::read_grid_header(is);
  const auto digits = detail::read_digits(is, t->size());
  std::vector<Strategy> cells;
  cells.reserve(digits.size());
  for (int v : digits) cells.push_back(strategy_from_int(v));
  return {t, std::move(cells)};
}

inline Configuration configuration_from_text(const std::string& text) {
  std::istringstream is(text);
  return read_configuration(is);
}

}  // namespace dbf
