#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbf/events.hpp"
#include "dbf/golden.hpp"
#include "dbf/lattice.hpp"

// Nearest-neighbor line (M = d = 1). A site's rate depends on the five cells
// centered on it, so a finite segment whose two outermost cells on each side
// are held fixed evolves as a closed Markov chain.

namespace dbf {

using Word = std::vector<Strategy>;

inline Word word_from_digits(const std::string& digits) {
  Word w;
  for (char c : digits) {
    if (c == '1' || c == '2') w.push_back(strategy_from_int(c - '0'));
    else if (c != ',' && c != ' ') throw std::invalid_argument("pattern digits must be 1 or 2");
  }
  return w;
}

inline std::string to_digits(const Word& w) {
  std::string s;
  for (auto c : w) s.push_back(static_cast<char>('0' + to_int(c)));
  return s;
}

inline Word swapped(const Word& w) {
  Word out(w);
  for (auto& c : out) c = opposite(c);
  return out;
}

/// Flip kind at cells[i]; needs two cells of context on each side.
inline FlipKind segment_flip_kind(const Word& cells, std::size_t i, const ScoreTable& sc) {
  if (i < 2 || i + 2 >= cells.size()) throw std::out_of_range("site needs two cells of context on each side");
  BestPayoffs best;
  for (std::size_t j : {i - 1, i + 1}) {
    const std::int64_t n1 = (cells[j - 1] == Strategy::kOne) + (cells[j + 1] == Strategy::kOne);
    best.offer(cells[j], sc.score(cells[j], n1, 2));
  }
  return best.rate_away_from(cells[i]);
}

inline Rational segment_flip_rate(const Word& cells, std::size_t i, const PayoffMatrix& p) {
  return to_rational(segment_flip_kind(cells, i, ScoreTable(p)));
}

// ---------------------------------------------------------------------------
// Segment process with frozen ends

struct LineEvent {
  double time = 0.0;
  std::size_t site = 0;
  Strategy old_strategy = Strategy::kOne;
  Strategy new_strategy = Strategy::kOne;
  bool tie = false;
  [[nodiscard]] bool flipped() const { return old_strategy != new_strategy; }
};

/// Jump chain of the process on a segment whose two outer cells at each end
/// never update. Only sites with positive rate are sampled; each such site
/// rings at rate one, so the holding time is exponential with rate equal to
/// their number.
class LineProcess {
 public:
  LineProcess(Word cells, const PayoffMatrix& p, std::uint64_t seed, bool invert_coins = false)
      : cells_(std::move(cells)), sc_(p), rng_(derive_seed(seed, 0x11e)), invert_(invert_coins) {
    if (cells_.size() < 5) throw std::invalid_argument("segment needs at least five cells");
    kinds_.assign(cells_.size(), FlipKind::kZero);
    pos_.assign(cells_.size(), -1);
    for (std::size_t i = 2; i + 2 < cells_.size(); ++i) refresh(i);
  }

  [[nodiscard]] const Word& cells() const { return cells_; }
  [[nodiscard]] std::size_t size() const { return cells_.size(); }
  [[nodiscard]] FlipKind kind(std::size_t i) const { return kinds_[i]; }
  [[nodiscard]] std::size_t active_count() const { return active_.size(); }
  [[nodiscard]] double time() const { return time_; }

  /// nullopt once no site can flip.
  std::optional<LineEvent> step() {
    if (active_.empty()) return std::nullopt;
    time_ += rng_.exponential(static_cast<double>(active_.size()));
    const auto i = active_[rng_.below(active_.size())];
    const bool coin = rng_.coin() != invert_;
    LineEvent e{time_, i, cells_[i], cells_[i], false};
    if (kinds_[i] == FlipKind::kOne) {
      e.new_strategy = opposite(e.old_strategy);
    } else {
      e.tie = true;
      e.new_strategy = coin ? Strategy::kOne : Strategy::kTwo;
    }
    if (e.flipped()) {
      cells_[i] = e.new_strategy;
      const std::size_t lo = std::max<std::size_t>(2, i - std::min<std::size_t>(i, 2));
      const std::size_t hi = std::min(cells_.size() - 3, i + 2);
      for (std::size_t j = lo; j <= hi; ++j) refresh(j);
    }
    return e;
  }

 private:
  void refresh(std::size_t i) {
    kinds_[i] = segment_flip_kind(cells_, i, sc_);
    const bool on = kinds_[i] != FlipKind::kZero;
    if (on && pos_[i] < 0) {
      pos_[i] = static_cast<std::int64_t>(active_.size());
      active_.push_back(i);
    } else if (!on && pos_[i] >= 0) {
      const auto k = static_cast<std::size_t>(pos_[i]);
      active_[k] = active_.back();
      pos_[active_[k]] = static_cast<std::int64_t>(k);
      active_.pop_back();
      pos_[i] = -1;
    }
  }

  Word cells_;
  ScoreTable sc_;
  Rng rng_;
  bool invert_;
  double time_ = 0.0;
  std::vector<FlipKind> kinds_;
  std::vector<std::size_t> active_;
  std::vector<std::int64_t> pos_;
};

// ---------------------------------------------------------------------------
// Fronts

/// Exterior families used to probe the worst case over initial conditions.
/// Cells are given relative to the core strategy s: "2" means opposite(s).
enum class Exterior { kAllTwo, kAlternating, kPairs, kAllOne };

inline const char* to_string(Exterior e) {
  switch (e) {
    case Exterior::kAllTwo: return "all-2";
    case Exterior::kAlternating: return "alternating";
    case Exterior::kPairs: return "pairs";
    case Exterior::kAllOne: return "all-1";
  }
  return "?";
}

inline Exterior exterior_from_string(const std::string& s) {
  for (auto e : {Exterior::kAllTwo, Exterior::kAlternating, Exterior::kPairs, Exterior::kAllOne}) {
    if (s == to_string(e)) return e;
  }
  throw std::invalid_argument("unknown exterior '" + s + "'");
}

/// k-th exterior cell counted outward from the core (k = 0 is adjacent).
inline Strategy exterior_cell(Exterior e, std::int64_t k, Strategy core) {
  const Strategy other = opposite(core);
  switch (e) {
    case Exterior::kAllTwo: return other;
    case Exterior::kAlternating: return k % 2 == 0 ? other : core;
    case Exterior::kPairs: return k % 3 < 2 ? other : core;
    case Exterior::kAllOne: return core;
  }
  return other;
}

struct FrontState {
  std::int64_t X = 0;               // last index of the leading run of core cells
  std::optional<std::int64_t> K;    // distance to the next core cell, none if absent
};

/// Front of the core run starting at the left edge. nullopt when the whole
/// segment is core (the front has left the window).
inline std::optional<FrontState> front_state(const Word& cells, Strategy core = Strategy::kOne) {
  std::size_t i = 0;
  while (i < cells.size() && cells[i] == core) ++i;
  if (i == cells.size()) return std::nullopt;
  if (i == 0) throw std::invalid_argument("segment must start with the core strategy");
  FrontState f;
  f.X = static_cast<std::int64_t>(i) - 1;
  for (std::size_t j = i + 1; j < cells.size(); ++j) {
    if (cells[j] == core) {
      f.K = static_cast<std::int64_t>(j) - f.X;
      break;
    }
  }
  return f;
}

/// Total rate of each front displacement, from the exact flip rates of every
/// updatable site. The front after a flip that turns the whole window core is
/// placed at the last index.
inline std::map<std::int64_t, Rational> front_jump_rates(const Word& cells, const PayoffMatrix& p,
                                                         Strategy core = Strategy::kOne) {
  const ScoreTable sc(p);
  const auto f0 = front_state(cells, core);
  if (!f0) throw std::invalid_argument("segment has no front");
  std::map<std::int64_t, Rational> out;
  Word w = cells;
  for (std::size_t i = 2; i + 2 < cells.size(); ++i) {
    const FlipKind k = segment_flip_kind(cells, i, sc);
    if (k == FlipKind::kZero) continue;
    w[i] = opposite(cells[i]);
    const auto f1 = front_state(w, core);
    const std::int64_t x1 = f1 ? f1->X : static_cast<std::int64_t>(cells.size()) - 1;
    w[i] = cells[i];
    if (x1 != f0->X) out[x1 - f0->X] += to_rational(k);
  }
  return out;
}

/// Generator of Z = phi^(-X) at the given state, with the front placed at x_position.
inline QSqrt5 z_drift(const std::map<std::int64_t, Rational>& rates, long x_position) {
  const QSqrt5 z = golden_power(-x_position);
  QSqrt5 total;
  for (const auto& [d, r] : rates) total += QSqrt5(r) * (golden_power(-(x_position + d)) - z);
  return total;
}

inline QSqrt5 z_drift(const Word& cells, const PayoffMatrix& p, long x_position = 0) {
  return z_drift(front_jump_rates(cells, p), x_position);
}

struct FrontContextResult {
  Word cells;
  std::int64_t X = 0;
  std::optional<std::int64_t> K;
  std::map<std::int64_t, Rational> rates;
  QSqrt5 drift;  // with the front at the origin, so Z = 1
};

/// Every front context: four core cells on the left, then a word of width
/// 1..max_width starting with the opposite strategy, then one of four tails
/// (opposite, core, alternating starting either way) of length tail_len.
inline std::vector<FrontContextResult> enumerate_front_contexts(const PayoffMatrix& p, int max_width = 9,
                                                                int tail_len = 4) {
  std::vector<FrontContextResult> out;
  const std::array<std::array<int, 2>, 4> tails{{{2, 2}, {1, 1}, {2, 1}, {1, 2}}};
  for (int w = 1; w <= max_width; ++w) {
    for (std::uint32_t bits = 0; bits < (1U << (w - 1)); ++bits) {
      for (const auto& t : tails) {
        Word cells(4, Strategy::kOne);
        cells.push_back(Strategy::kTwo);
        for (int k = 0; k < w - 1; ++k) cells.push_back((bits >> k) & 1U ? Strategy::kOne : Strategy::kTwo);
        for (int k = 0; k < tail_len + 2; ++k) cells.push_back(strategy_from_int(t[k % 2]));
        FrontContextResult r;
        const auto f = *front_state(cells);
        r.X = f.X;
        r.K = f.K;
        r.rates = front_jump_rates(cells, p);
        r.drift = z_drift(r.rates, 0);
        r.cells = std::move(cells);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Half-line and interval runs

enum class HittingOutcome { kReachedN, kHitMinusOne, kStalled };

inline const char* to_string(HittingOutcome h) {
  switch (h) {
    case HittingOutcome::kReachedN: return "reached-n";
    case HittingOutcome::kHitMinusOne: return "hit-minus-one";
    case HittingOutcome::kStalled: return "stalled";
  }
  return "?";
}

struct HalfLineOptions {
  std::int64_t x0 = 0;               // initial front
  std::int64_t margin = 20;          // exterior cells kept beyond the level
  std::uint64_t max_events = 50'000'000;
};

/// Half-line start: core strategy 1 on (-inf, x0], exterior beyond. The
/// window is [-4, max(n, x0) + margin] with two frozen cells at each end.
/// Cells left of X - 1 cannot flip, so the left edge is exact.
inline HittingOutcome run_hitting(const PayoffMatrix& p, Exterior ext, std::int64_t n, std::uint64_t seed,
                                  const HalfLineOptions& opt = {}) {
  if (n < 1 || opt.x0 < 0) throw std::invalid_argument("need n >= 1 and x0 >= 0");
  const std::int64_t left = -4;
  const std::int64_t right = std::max(n, opt.x0) + opt.margin;
  Word cells;
  for (std::int64_t x = left; x <= right; ++x) {
    cells.push_back(x <= opt.x0 ? Strategy::kOne : exterior_cell(ext, x - opt.x0 - 1, Strategy::kOne));
  }
  auto front = front_state(cells);
  std::int64_t X = front ? front->X + left : right;
  if (X >= n) return HittingOutcome::kReachedN;
  LineProcess proc(std::move(cells), p, seed);
  const auto& c = proc.cells();
  for (std::uint64_t k = 0; k < opt.max_events; ++k) {
    const auto e = proc.step();
    if (!e) return HittingOutcome::kStalled;
    if (!e->flipped()) continue;
    const auto x = static_cast<std::int64_t>(e->site) + left;
    if (x == X) {
      X -= 1;
      if (X <= -1) return HittingOutcome::kHitMinusOne;
    } else if (x == X + 1) {
      auto j = static_cast<std::size_t>(x - left) + 1;
      while (j < c.size() && c[j] == Strategy::kOne) ++j;
      X = static_cast<std::int64_t>(j) - 1 + left;
      if (X >= n) return HittingOutcome::kReachedN;
    }
  }
  return HittingOutcome::kStalled;
}

enum class SurvivalOutcome { kIntactEscape, kBroken, kStalled };

inline const char* to_string(SurvivalOutcome s) {
  switch (s) {
    case SurvivalOutcome::kIntactEscape: return "intact-escape";
    case SurvivalOutcome::kBroken: return "broken";
    case SurvivalOutcome::kStalled: return "stalled";
  }
  return "?";
}

struct IntervalOptions {
  Strategy core = Strategy::kOne;
  std::int64_t margin = 20;
  std::uint64_t max_events = 50'000'000;
};

/// Core strategy on [-m, m], exterior mirrored on both sides, window
/// [-(n + margin), n + margin] with frozen ends. Broken at the first flip
/// inside [-m, m]; intact-escape once the run containing the core has reached
/// n on the right and -n on the left.
inline SurvivalOutcome interval_survival(const PayoffMatrix& p, std::int64_t m, Exterior ext, std::int64_t n,
                                         std::uint64_t seed, const IntervalOptions& opt = {}) {
  if (m < 1 || n <= m) throw std::invalid_argument("need 1 <= m < n");
  const Strategy s = opt.core;
  const std::int64_t R = n + opt.margin;
  Word cells;
  for (std::int64_t x = -R; x <= R; ++x) {
    const std::int64_t dist = std::abs(x) - m - 1;
    cells.push_back(dist < 0 ? s : exterior_cell(ext, dist, s));
  }
  auto idx = [&](std::int64_t x) { return static_cast<std::size_t>(x + R); };
  std::int64_t hi = m, lo = -m;
  while (hi < R && cells[idx(hi + 1)] == s) ++hi;
  while (lo > -R && cells[idx(lo - 1)] == s) --lo;
  bool right_done = hi >= n, left_done = lo <= -n;
  if (right_done && left_done) return SurvivalOutcome::kIntactEscape;
  LineProcess proc(std::move(cells), p, seed);
  const auto& c = proc.cells();
  for (std::uint64_t k = 0; k < opt.max_events; ++k) {
    const auto e = proc.step();
    if (!e) return SurvivalOutcome::kStalled;
    if (!e->flipped()) continue;
    const auto x = static_cast<std::int64_t>(e->site) - R;
    if (x >= -m && x <= m) return SurvivalOutcome::kBroken;
    if (x == hi) {
      --hi;
    } else if (x == hi + 1) {
      hi = x;
      while (hi < R && c[idx(hi + 1)] == s) ++hi;
    } else if (x == lo) {
      ++lo;
    } else if (x == lo - 1) {
      lo = x;
      while (lo > -R && c[idx(lo - 1)] == s) --lo;
    }
    right_done = right_done || hi >= n;
    left_done = left_done || lo <= -n;
    if (right_done && left_done) return SurvivalOutcome::kIntactEscape;
  }
  return SurvivalOutcome::kStalled;
}

// ---------------------------------------------------------------------------
// Maximal blocks

struct Block {
  Strategy type = Strategy::kOne;
  std::int64_t start = 0;
  std::int64_t length = 0;
  friend bool operator==(const Block&, const Block&) = default;
};

struct BlockDecomposition {
  std::vector<Block> blocks;
  std::int64_t length = 0;
  bool cyclic = false;
};

inline BlockDecomposition decompose_blocks(const Word& w) {
  BlockDecomposition d{{}, static_cast<std::int64_t>(w.size()), false};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (d.blocks.empty() || d.blocks.back().type != w[i]) {
      d.blocks.push_back({w[i], static_cast<std::int64_t>(i), 1});
    } else {
      ++d.blocks.back().length;
    }
  }
  return d;
}

/// Cyclic form for a one-dimensional torus; blocks start at interfaces so that
/// the block count equals the interface count (one block when uniform).
inline BlockDecomposition decompose_blocks(const Configuration& xi) {
  if (xi.torus().d() != 1) throw std::invalid_argument("block decomposition needs d = 1");
  const std::int64_t L = xi.size();
  BlockDecomposition d{{}, L, true};
  std::int64_t first = -1;
  for (std::int64_t x = 0; x < L; ++x) {
    if (xi[x] != xi[(x + L - 1) % L]) {
      first = x;
      break;
    }
  }
  if (first < 0) {
    d.blocks.push_back({xi[0], 0, L});
    return d;
  }
  for (std::int64_t k = 0; k < L; ++k) {
    const std::int64_t x = (first + k) % L;
    if (d.blocks.empty() || d.blocks.back().type != xi[x]) d.blocks.push_back({xi[x], x, 1});
    else ++d.blocks.back().length;
  }
  return d;
}

inline Word recompose(const BlockDecomposition& d) {
  Word w(static_cast<std::size_t>(d.length), Strategy::kOne);
  for (const auto& b : d.blocks) {
    for (std::int64_t k = 0; k < b.length; ++k) w[static_cast<std::size_t>((b.start + k) % d.length)] = b.type;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Patterns

struct Pattern {
  Word word;
  std::array<Strategy, 2> left{Strategy::kTwo, Strategy::kTwo};
  std::array<Strategy, 2> right{Strategy::kTwo, Strategy::kTwo};

  [[nodiscard]] Word full() const {
    Word w{left[0], left[1]};
    w.insert(w.end(), word.begin(), word.end());
    w.push_back(right[0]);
    w.push_back(right[1]);
    return w;
  }
  [[nodiscard]] std::string to_string() const {
    return "[" + to_digits({left[0], left[1]}) + "]" + to_digits(word) + "[" + to_digits({right[0], right[1]}) + "]";
  }
};

struct StabilityReport {
  bool stable = false;
  std::vector<Rational> flip_rates;  // one per word cell
};

/// Rates of the word cells with the context held as given.
inline StabilityReport is_stable_pattern(const Pattern& sigma, const PayoffMatrix& p) {
  if (sigma.word.empty()) throw std::invalid_argument("pattern must have at least one cell");
  const ScoreTable sc(p);
  const Word w = sigma.full();
  StabilityReport r{true, {}};
  for (std::size_t i = 0; i < sigma.word.size(); ++i) {
    const FlipKind k = segment_flip_kind(w, i + 2, sc);
    r.flip_rates.push_back(to_rational(k));
    r.stable = r.stable && k == FlipKind::kZero;
  }
  return r;
}

inline std::vector<std::array<Strategy, 2>> all_contexts() {
  std::vector<std::array<Strategy, 2>> out;
  for (int a = 1; a <= 2; ++a) {
    for (int b = 1; b <= 2; ++b) out.push_back({strategy_from_int(a), strategy_from_int(b)});
  }
  return out;
}

/// Stable whatever the two cells on either side are. Returns the first
/// failing pattern, if any.
inline std::optional<Pattern> unstable_context(const Word& word, const PayoffMatrix& p) {
  for (const auto& l : all_contexts()) {
    for (const auto& r : all_contexts()) {
      Pattern s{word, l, r};
      if (!is_stable_pattern(s, p).stable) return s;
    }
  }
  return std::nullopt;
}

struct TransitionCheck {
  std::string name;
  bool holds = true;
  std::vector<std::string> counterexamples;
};

struct ForbiddenReport {
  bool claim1_asserted = false;  // 2a11 > a21 + a22 > a11 + a12
  bool claim2_asserted = false;
  std::vector<TransitionCheck> claim1;
  std::vector<TransitionCheck> claim2;
  [[nodiscard]] bool passes() const {
    auto ok = [](const std::vector<TransitionCheck>& v) {
      return std::all_of(v.begin(), v.end(), [](const TransitionCheck& c) { return c.holds; });
    };
    return (!claim1_asserted || ok(claim1)) && (!claim2_asserted || ok(claim2));
  }
};

namespace detail {

/// Rate at word[target] must vanish for every two-cell context on both sides.
inline TransitionCheck zero_rate_everywhere(const std::string& name, const Word& word, std::size_t target,
                                            const ScoreTable& sc) {
  TransitionCheck c{name, true, {}};
  for (const auto& l : all_contexts()) {
    for (const auto& r : all_contexts()) {
      const Pattern s{word, l, r};
      if (segment_flip_kind(s.full(), target + 2, sc) != FlipKind::kZero) {
        c.holds = false;
        c.counterexamples.push_back(s.to_string());
      }
    }
  }
  return c;
}

}  // namespace detail

/// The transitions that would create (1,2,1), and the protected core of a run
/// of 1s flanked by pairs of 2s, all checked by exact rates.
inline ForbiddenReport forbidden_transition_check(const PayoffMatrix& p) {
  const auto rp = region_predicates(p, NeighborhoodSpec(1, 1));
  const ScoreTable sc(p);
  ForbiddenReport rep;
  rep.claim1_asserted = rp.fixation_case2;
  rep.claim2_asserted = rp.fixation_case2;
  const auto w = word_from_digits;
  rep.claim1.push_back(detail::zero_rate_everywhere("111->121", w("111"), 1, sc));
  rep.claim1.push_back(detail::zero_rate_everywhere("2221->2121", w("2221"), 1, sc));
  rep.claim1.push_back(detail::zero_rate_everywhere("1221->1121", w("1221"), 1, sc));
  rep.claim1.push_back(detail::zero_rate_everywhere("1222->1212", w("1222"), 2, sc));
  rep.claim1.push_back(detail::zero_rate_everywhere("1221->1211", w("1221"), 2, sc));
  for (const char* pre : {"11", "21", "22"}) {
    const Word left = w(std::string(pre) + "111");
    rep.claim2.push_back(detail::zero_rate_everywhere(std::string(pre) + "[1]11", left, 2, sc));
    const Word right(left.rbegin(), left.rend());
    const std::string mirrored{pre[1], pre[0]};
    rep.claim2.push_back(detail::zero_rate_everywhere("11[1]" + mirrored, right, 2, sc));
  }
  return rep;
}

struct PatternClaim {
  std::string name;
  bool asserted = false;  // payoffs satisfy the claim's hypotheses
  bool holds = false;
};

/// The stability and instability statements used in the fixation argument,
/// each gated on the inequalities it relies on.
inline std::vector<PatternClaim> pattern_claims(const PayoffMatrix& p) {
  const auto rp = region_predicates(p, NeighborhoodSpec(1, 1));
  const ScoreTable sc(p);
  const auto w = word_from_digits;
  const bool case1 = rp.fixation_case1 && p.a21 + p.a22 >= p.a11 + p.a12;
  const bool case2 = rp.fixation_case2 && p.a22 * 2 <= p.a11 + p.a12;
  const std::array<Strategy, 2> c22{Strategy::kTwo, Strategy::kTwo};
  const std::array<Strategy, 2> c11{Strategy::kOne, Strategy::kOne};
  std::vector<PatternClaim> out;

  auto all_ctx_stable = [&](const Word& word) { return !unstable_context(word, p).has_value(); };
  auto stable_in = [&](const Word& word, std::array<Strategy, 2> l, std::array<Strategy, 2> r) {
    return is_stable_pattern({word, l, r}, p).stable;
  };
  auto rate = [&](const Word& word, std::array<Strategy, 2> l, std::array<Strategy, 2> r, std::size_t i) {
    return is_stable_pattern({word, l, r}, p).flip_rates.at(i);
  };

  {
    bool h = true;
    for (int k = 3; k <= 6; ++k) h = h && all_ctx_stable(Word(k, Strategy::kTwo));
    out.push_back({"case1: blocks of 2s of length >= 3 are stable", case1, h});
  }
  {
    bool h = true;
    for (auto s : {Strategy::kOne, Strategy::kTwo}) {
      for (auto o : {Strategy::kOne, Strategy::kTwo}) {
        for (auto q : {Strategy::kOne, Strategy::kTwo}) {
          const std::array<Strategy, 2> l{o, opposite(s)}, r{opposite(s), q};
          h = h && rate({s}, l, r, 0).sign() > 0;
        }
      }
    }
    out.push_back({"case1: maximal blocks of length one can flip", case1, h});
  }
  out.push_back({"case1: (2,2,1,1,2,2) central 1s can flip", case1,
                 rate(w("11"), c22, c22, 0).sign() > 0 && rate(w("11"), c22, c22, 1).sign() > 0});
  {
    bool h = true;
    for (const auto& r : all_contexts()) h = h && rate(w("111"), c22, r, 0).sign() == 0;
    out.push_back({"case1: leftmost 1 of (2,2,1,1,1) has rate zero", case1, h});
  }
  {
    bool h = true;
    for (int k = 3; k <= 6; ++k) h = h && stable_in(Word(k, Strategy::kOne), c22, c22);
    out.push_back({"case1: blocks of 1s of length >= 3 between pairs of 2s are stable", case1, h});
  }
  out.push_back({"case1: the two 2s of (1,1,1,2,2,1,1,1) share one rate", case1,
                 rate(w("11122111"), c11, c11, 3) == rate(w("11122111"), c11, c11, 4)});
  out.push_back({"case1: (2,2,2,1,1,1,2,2,2) is stable", case1, all_ctx_stable(w("222111222"))});

  out.push_back({"case2: leftmost 2 of (1,1,2,2,2) can flip", case2, rate(w("1122"), c22, c22, 2).sign() > 0});
  {
    const auto r = is_stable_pattern({w("11"), c22, c22}, p);
    out.push_back({"case2: (2,2,1,1,2,2) can shrink", case2, !r.stable});
  }
  out.push_back({"case2: (1,1,1) in (2,2,1,1,1,2,2) is stable", case2, stable_in(w("111"), c22, c22)});
  out.push_back({"case2: (1,1,1,2,2,1,1,1) in pairs of 2s is stable", case2, stable_in(w("11122111"), c22, c22)});
  {
    // words made of 1-runs of length >= 3 separated by pairs of 2s
    bool h = true;
    std::vector<Word> frontier{w("111"), w("1111"), w("11111")};
    while (!frontier.empty()) {
      Word cur = frontier.back();
      frontier.pop_back();
      if (!stable_in(cur, c22, c22)) h = false;
      for (int k = 3; k <= 5; ++k) {
        Word next = cur;
        next.push_back(Strategy::kTwo);
        next.push_back(Strategy::kTwo);
        next.insert(next.end(), static_cast<std::size_t>(k), Strategy::kOne);
        if (next.size() <= 16) frontier.push_back(std::move(next));
      }
    }
    out.push_back({"case2: 2-blocks of length two and 1-blocks of length >= 3 are stable", case2, h});
  }
  const auto fr = forbidden_transition_check(p);
  bool c1 = true, c2 = true;
  for (const auto& t : fr.claim1) c1 = c1 && t.holds;
  for (const auto& t : fr.claim2) c2 = c2 && t.holds;
  out.push_back({"case2: transitions creating (1,2,1) have rate zero", fr.claim1_asserted, c1});
  out.push_back({"case2: cores of (2,2,1,...,1,2,2) never flip", fr.claim2_asserted, c2});
  return out;
}

// ---------------------------------------------------------------------------
// Absorbing chain on a bounded segment

struct AbsorbingReport {
  bool absorbing = false;
  int length = 0;
  std::size_t states = 0;
  std::size_t absorbing_states = 0;
  std::size_t unreached = 0;
  std::optional<Word> counterexample;
  std::vector<std::int32_t> next;  // next state on a shortest positive-rate path, -1 at absorbing states
};

namespace detail {

inline Word state_word(std::uint32_t s, int L) {
  Word w(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) w[i] = (s >> i) & 1U ? Strategy::kOne : Strategy::kTwo;
  return w;
}

inline std::uint32_t word_state(const Word& w) {
  std::uint32_t s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s |= (w[i] == Strategy::kOne ? 1U : 0U) << i;
  return s;
}

}  // namespace detail

/// All 2^L0 fillings of a segment between fixed pairs of boundary cells.
/// Breadth-first search backwards from the absorbing fillings along
/// positive-rate single flips.
inline AbsorbingReport absorbing_chain_verify(int L0, const PayoffMatrix& p,
                                              std::array<Strategy, 2> boundary = {Strategy::kTwo, Strategy::kTwo}) {
  if (L0 < 1 || L0 > 20) throw std::invalid_argument("segment length must lie in [1, 20]");
  const ScoreTable sc(p);
  const std::uint32_t n = 1U << L0;
  AbsorbingReport rep;
  rep.length = L0;
  rep.states = n;
  std::vector<std::uint32_t> mask(n, 0);
  Word cells(static_cast<std::size_t>(L0) + 4);
  cells[0] = boundary[0];
  cells[1] = boundary[1];
  cells[L0 + 2] = boundary[1];
  cells[L0 + 3] = boundary[0];
  for (std::uint32_t s = 0; s < n; ++s) {
    for (int i = 0; i < L0; ++i) cells[i + 2] = (s >> i) & 1U ? Strategy::kOne : Strategy::kTwo;
    for (int i = 0; i < L0; ++i) {
      if (segment_flip_kind(cells, static_cast<std::size_t>(i) + 2, sc) != FlipKind::kZero) mask[s] |= 1U << i;
    }
  }
  rep.next.assign(n, -2);
  std::vector<std::uint32_t> queue;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (mask[s] == 0) {
      rep.next[s] = -1;
      queue.push_back(s);
    }
  }
  rep.absorbing_states = queue.size();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t t = queue[head];
    for (int i = 0; i < L0; ++i) {
      const std::uint32_t s = t ^ (1U << i);
      if (rep.next[s] == -2 && (mask[s] >> i) & 1U) {
        rep.next[s] = static_cast<std::int32_t>(t);
        queue.push_back(s);
      }
    }
  }
  for (std::uint32_t s = 0; s < n; ++s) {
    if (rep.next[s] == -2) {
      ++rep.unreached;
      if (!rep.counterexample) rep.counterexample = detail::state_word(s, L0);
    }
  }
  rep.absorbing = rep.unreached == 0;
  return rep;
}

/// Positive-rate flip sequence from `start` to an absorbing filling; empty if none exists.
inline std::vector<Word> witness_path(const AbsorbingReport& rep, const Word& start) {
  if (static_cast<int>(start.size()) != rep.length) throw std::invalid_argument("word length mismatch");
  std::vector<Word> path;
  std::int64_t s = detail::word_state(start);
  if (rep.next[s] == -2) return path;
  while (s >= 0) {
    path.push_back(detail::state_word(static_cast<std::uint32_t>(s), rep.length));
    s = rep.next[s];
  }
  return path;
}

// ---------------------------------------------------------------------------
// Length of a single run of 1s in a background of 2s

struct LengthRates {
  Rational grow;
  Rational shrink;
  Rational other;  // flips that break the single-run shape
};

/// Exact rates of the events that change the length of a run of ell 1s
/// surrounded by 2s.
inline LengthRates interval_length_rates(const PayoffMatrix& p, int ell) {
  if (ell < 1) throw std::invalid_argument("run length must be positive");
  Word cells(4, Strategy::kTwo);
  cells.insert(cells.end(), static_cast<std::size_t>(ell), Strategy::kOne);
  cells.insert(cells.end(), 4, Strategy::kTwo);
  const ScoreTable sc(p);
  LengthRates r;
  for (std::size_t i = 2; i + 2 < cells.size(); ++i) {
    const Rational k = to_rational(segment_flip_kind(cells, i, sc));
    if (k.sign() == 0) continue;
    const bool inside = cells[i] == Strategy::kOne;
    const bool edge = inside ? (cells[i - 1] == Strategy::kTwo || cells[i + 1] == Strategy::kTwo)
                             : (cells[i - 1] == Strategy::kOne || cells[i + 1] == Strategy::kOne);
    if (!edge) r.other += k;
    else if (inside) r.shrink += k;
    else r.grow += k;
  }
  return r;
}

struct FluctuationReport {
  std::int64_t up = 0;        // +1 steps at length >= 3
  std::int64_t down = 0;      // -1 steps at length >= 3
  std::int64_t up_at_2 = 0;
  std::int64_t down_at_2 = 0;
  std::int64_t irregular = 0;  // flips that did not change the length by one
  std::int64_t flips = 0;
  std::int64_t max_length = 0;
  bool truncated = false;  // run came too close to the window edge
};

/// Follows one run of 1s started at length ell0 in a window of 2s for up to
/// max_flips flips.
inline FluctuationReport fluctuation_run(const PayoffMatrix& p, int ell0, std::int64_t max_flips, std::uint64_t seed,
                                         std::int64_t half_window = 4000) {
  const std::int64_t W = 2 * half_window + ell0;
  Word cells(static_cast<std::size_t>(W), Strategy::kTwo);
  std::int64_t lo = half_window, hi = half_window + ell0 - 1;
  for (std::int64_t x = lo; x <= hi; ++x) cells[x] = Strategy::kOne;
  LineProcess proc(std::move(cells), p, seed);
  const auto& c = proc.cells();
  FluctuationReport r;
  r.max_length = ell0;
  while (r.flips < max_flips) {
    const auto e = proc.step();
    if (!e) break;
    if (!e->flipped()) continue;
    ++r.flips;
    const std::int64_t len = hi - lo + 1;
    const auto x = static_cast<std::int64_t>(e->site);
    int delta = 0;
    if (x == lo - 1 && c[x] == Strategy::kOne) --lo, delta = 1;
    else if (x == hi + 1 && c[x] == Strategy::kOne) ++hi, delta = 1;
    else if (x == lo && c[x] == Strategy::kTwo && len > 1) ++lo, delta = -1;
    else if (x == hi && c[x] == Strategy::kTwo && len > 1) --hi, delta = -1;
    if (delta == 0) {
      ++r.irregular;
      break;
    }
    if (len >= 3) (delta > 0 ? r.up : r.down) += 1;
    else if (len == 2) (delta > 0 ? r.up_at_2 : r.down_at_2) += 1;
    r.max_length = std::max(r.max_length, hi - lo + 1);
    if (lo < 6 || hi > W - 7) {
      r.truncated = true;
      break;
    }
  }
  return r;
}

}  // namespace dbf
