#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbf/rational.hpp"

namespace dbf {

enum class Strategy : std::uint8_t { kOne = 1, kTwo = 2 };

constexpr Strategy opposite(Strategy s) { return s == Strategy::kOne ? Strategy::kTwo : Strategy::kOne; }
constexpr int to_int(Strategy s) { return static_cast<int>(s); }
inline Strategy strategy_from_int(int v) {
  if (v == 1) return Strategy::kOne;
  if (v == 2) return Strategy::kTwo;
  throw std::invalid_argument("strategy must be 1 or 2, got " + std::to_string(v));
}

/// Payoff of the row strategy against the column strategy.
struct PayoffMatrix {
  Rational a11, a12, a21, a22;

  [[nodiscard]] const Rational& at(Strategy row, Strategy col) const {
    if (row == Strategy::kOne) return col == Strategy::kOne ? a11 : a12;
    return col == Strategy::kOne ? a21 : a22;
  }

  /// The same game with strategy labels exchanged.
  [[nodiscard]] PayoffMatrix swapped() const { return {a22, a21, a12, a11}; }

  [[nodiscard]] std::string to_string() const {
    return a11.to_string() + " " + a12.to_string() + " " + a21.to_string() + " " + a22.to_string();
  }

  /// Parses four whitespace- or comma-separated rationals "a11 a12 a21 a22".
  static PayoffMatrix parse(const std::string& text) {
    std::string norm = text;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream in(norm);
    std::vector<Rational> v;
    std::string tok;
    while (in >> tok) v.push_back(Rational::parse(tok));
    if (v.size() != 4) {
      throw std::invalid_argument("payoff matrix needs exactly four entries, got '" + text + "'");
    }
    return {v[0], v[1], v[2], v[3]};
  }

  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;
};

struct DerivedParams {
  Rational a1;  // a11 - a21
  Rational a2;  // a22 - a12
  friend bool operator==(const DerivedParams&, const DerivedParams&) = default;
};

inline DerivedParams derive_params(const PayoffMatrix& p) { return {p.a11 - p.a21, p.a22 - p.a12}; }

enum class Nature { kAltruistic, kSelfish, kNeutral };

inline const char* to_string(Nature n) {
  switch (n) {
    case Nature::kAltruistic: return "altruistic";
    case Nature::kSelfish: return "selfish";
    case Nature::kNeutral: return "neutral";
  }
  return "?";
}

inline Nature strategy_nature(const DerivedParams& dp, Strategy i) {
  const Rational& a = i == Strategy::kOne ? dp.a1 : dp.a2;
  if (a.sign() < 0) return Nature::kAltruistic;
  if (a.sign() > 0) return Nature::kSelfish;
  return Nature::kNeutral;
}

/// Interaction geometry: dimension d, range M, and N = (2M+1)^d - 1 neighbors.
class NeighborhoodSpec {
 public:
  NeighborhoodSpec(int d, int M) : d_(d), M_(M) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    if (M < 1) throw std::invalid_argument("range must be positive");
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) {
      n *= 2 * M + 1;
      if (n > (std::int64_t{1} << 31)) throw std::invalid_argument("neighborhood too large");
    }
    N_ = n - 1;
  }
  [[nodiscard]] int d() const { return d_; }
  [[nodiscard]] int M() const { return M_; }
  [[nodiscard]] std::int64_t N() const { return N_; }
  friend bool operator==(const NeighborhoodSpec&, const NeighborhoodSpec&) = default;

 private:
  int d_;
  int M_;
  std::int64_t N_;
};

/// a_{i1} n1/N + a_{i2} n2/N for a player of strategy i with n1, n2 neighbors of each type.
inline Rational local_payoff(Strategy i, std::int64_t n1, std::int64_t n2, const PayoffMatrix& p,
                             const NeighborhoodSpec& ns) {
  if (n1 < 0 || n2 < 0 || n1 + n2 != ns.N()) {
    throw std::invalid_argument("neighbor counts must sum to N=" + std::to_string(ns.N()));
  }
  return (p.at(i, Strategy::kOne) * n1 + p.at(i, Strategy::kTwo) * n2) / Rational(ns.N());
}

// ---------------------------------------------------------------------------
// Game classification

struct GameClass {
  /// Strict ordering of the payoffs after the a12 <= a21 label normalization,
  /// e.g. "a12<a22<a11<a21"; ties are written with '='.
  std::string ordering;
  bool labels_swapped = false;  // normalization exchanged the labels
  bool boundary = false;        // lies on at least one of the five lines
  std::vector<std::string> boundary_lines;
  std::optional<std::string> name;
  Nature nature1 = Nature::kNeutral;
  Nature nature2 = Nature::kNeutral;
};

namespace detail {

inline std::string ordering_string(const PayoffMatrix& p) {
  std::array<std::pair<Rational, std::string>, 4> v{{{p.a11, "a11"}, {p.a12, "a12"}, {p.a21, "a21"}, {p.a22, "a22"}}};
  std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::string out = v[0].second;
  for (std::size_t i = 1; i < v.size(); ++i) {
    out += (v[i].first == v[i - 1].first) ? "=" : "<";
    out += v[i].second;
  }
  return out;
}

}  // namespace detail

inline GameClass classify_game(const PayoffMatrix& p) {
  GameClass g;
  const auto dp = derive_params(p);
  g.nature1 = strategy_nature(dp, Strategy::kOne);
  g.nature2 = strategy_nature(dp, Strategy::kTwo);

  if (p.a11 == p.a12) g.boundary_lines.emplace_back("a11=a12");
  if (p.a11 == p.a21) g.boundary_lines.emplace_back("a11=a21");
  if (p.a22 == p.a12) g.boundary_lines.emplace_back("a22=a12");
  if (p.a22 == p.a21) g.boundary_lines.emplace_back("a22=a21");
  if (p.a11 == p.a22) g.boundary_lines.emplace_back("a11=a22");
  g.boundary = !g.boundary_lines.empty();

  // Naming uses the a12 <= a21 convention; the dynamics never do.
  const PayoffMatrix q = p.a12 > p.a21 ? p.swapped() : p;
  g.labels_swapped = p.a12 > p.a21;
  g.ordering = detail::ordering_string(q);

  static const std::array<std::pair<const char*, const char*>, 7> kNames{{
      {"a12<a22<a11<a21", "prisoner's dilemma"},
      {"a22<a12<a11<a21", "hawk-dove"},
      {"a12<a22<a21<a11", "stag hunt"},
      {"a22<a11<a12<a21", "leader"},
      {"a11<a22<a12<a21", "battle of the sexes"},
      {"a22<a12<a21<a11", "harmony"},
      {"a12<a11<a22<a21", "deadlock"},
  }};
  for (const auto& [ord, name] : kNames) {
    if (g.ordering == ord) g.name = name;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Parameter-region predicates

struct RegionPredicates {
  bool pure_growth = false;   // min(a11,a12) > max(a21,a22)
  bool weak = false;          // a11 > max(a21,a22)
  bool strong = false;        // (N-1)a11 + min(a11,a12) > N max(a21,a22)
  bool weak2 = false;         // label-swapped weak
  bool strong2 = false;       // label-swapped strong
  bool gold1 = false;
  bool gold2 = false;
  bool fixation_case1 = false;  // 2a11 > a21+a22 and 2a22 > a11+a12
  bool fixation_case2 = false;  // 2a11 > a21+a22 > a11+a12
  bool fixation_case3 = false;  // 2a22 > a11+a12 > a21+a22
  bool fixation = false;
  bool open_region = false;
  bool symmetric_coexistence = false;  // a11 = a22 < a12 = a21
  bool prisoners_dilemma = false;      // a12 < a22 < a11 < a21
};

inline RegionPredicates region_predicates(const PayoffMatrix& p, const NeighborhoodSpec& ns) {
  RegionPredicates r;
  const Rational N(ns.N());
  const Rational max2 = max(p.a21, p.a22);
  const Rational max1 = max(p.a11, p.a12);
  r.pure_growth = min(p.a11, p.a12) > max2;
  r.weak = p.a11 > max2;
  r.strong = (N - 1) * p.a11 + min(p.a11, p.a12) > N * max2;
  r.weak2 = p.a22 > max1;
  r.strong2 = (N - 1) * p.a22 + min(p.a21, p.a22) > N * max1;
  r.gold1 = (p.a11 + p.a12 > p.a22 + max2) && (p.a11 * 2 > p.a21 + p.a22);
  r.gold2 = (p.a21 + p.a22 > p.a11 + max(p.a12, p.a11)) && (p.a22 * 2 > p.a11 + p.a12);
  const Rational s1 = p.a11 + p.a12;
  const Rational s2 = p.a21 + p.a22;
  r.fixation_case1 = (p.a11 * 2 > s2) && (p.a22 * 2 > s1);
  r.fixation_case2 = (p.a11 * 2 > s2) && (s2 > s1);
  r.fixation_case3 = (p.a22 * 2 > s1) && (s1 > s2);
  r.fixation = r.fixation_case1 || r.fixation_case2 || r.fixation_case3;
  r.open_region = (p.a11 * 2 < s2) && (s1 > p.a22 + max2);
  r.symmetric_coexistence = p.a11 == p.a22 && p.a12 == p.a21 && p.a11 < p.a12;
  r.prisoners_dilemma = p.a12 < p.a22 && p.a22 < p.a11 && p.a11 < p.a21;
  return r;
}

// ---------------------------------------------------------------------------
// Integer score kernel used by every simulator.
//
// Multiplying all payoffs by a common positive constant and comparing
// N * payoff instead of payoff preserves every comparison in the update rule,
// so flip decisions can be made on exact 64-bit integers.

class ScoreTable {
 public:
  explicit ScoreTable(const PayoffMatrix& p) {
    std::int64_t l = 1;
    for (const Rational* r : {&p.a11, &p.a12, &p.a21, &p.a22}) {
      l = std::lcm(l, r->den());
      if (l > (std::int64_t{1} << 30)) throw std::overflow_error("payoff denominators too large");
    }
    auto scaled = [&](const Rational& r) {
      const __int128 v = static_cast<__int128>(r.num()) * (l / r.den());
      if (v > (std::int64_t{1} << 30) || v < -(std::int64_t{1} << 30)) {
        throw std::overflow_error("payoff magnitude too large for the integer kernel");
      }
      return static_cast<std::int64_t>(v);
    };
    a_ = {scaled(p.a11), scaled(p.a12), scaled(p.a21), scaled(p.a22)};
  }

  /// N times the (scaled) payoff of a strategy-s player with n1 type-1 neighbors out of N.
  [[nodiscard]] std::int64_t score(Strategy s, std::int64_t n1, std::int64_t N) const {
    const std::size_t row = s == Strategy::kOne ? 0 : 2;
    return a_[row] * n1 + a_[row + 1] * (N - n1);
  }

 private:
  std::array<std::int64_t, 4> a_{};
};

/// Outcome class of the update rule at one site: the rate of flipping away.
enum class FlipKind : std::uint8_t { kZero, kHalf, kOne };

inline Rational to_rational(FlipKind k) {
  switch (k) {
    case FlipKind::kZero: return Rational(0);
    case FlipKind::kHalf: return Rational(1, 2);
    case FlipKind::kOne: return Rational(1);
  }
  return Rational(0);
}

/// Best neighbor payoff per type; nullopt encodes the -infinity sentinel.
struct BestPayoffs {
  std::optional<std::int64_t> phi1;
  std::optional<std::int64_t> phi2;

  void offer(Strategy s, std::int64_t v) {
    auto& slot = s == Strategy::kOne ? phi1 : phi2;
    if (!slot || v > *slot) slot = v;
  }

  /// Sign of Phi_1 - Phi_2 with -infinity below every finite value.
  [[nodiscard]] int compare() const {
    if (!phi1 && !phi2) return 0;
    if (!phi1) return -1;
    if (!phi2) return 1;
    return (*phi1 > *phi2) - (*phi1 < *phi2);
  }

  /// Rate at which a site currently holding `current` switches strategy.
  [[nodiscard]] FlipKind rate_away_from(Strategy current) const {
    if (!phi1 && !phi2) return FlipKind::kZero;  // isolated site, nobody to mimic
    const int c = compare();
    if (c == 0) return FlipKind::kHalf;
    const Strategy fitter = c > 0 ? Strategy::kOne : Strategy::kTwo;
    return fitter == current ? FlipKind::kZero : FlipKind::kOne;
  }
};

}  // namespace dbf
