#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dbf/bootstrap.hpp"
#include "dbf/interface1d.hpp"
#include "dbf/mean_field.hpp"
#include "dbf/simulation.hpp"
#include "dbf/stats.hpp"

namespace dbf {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  std::string kind = "simulate";
  PayoffMatrix payoffs{Rational(3), Rational(2), Rational(1), Rational(0)};
  int d = 1;
  int M = 1;
  std::vector<int> sides{100};
  double rho = 0.5;
  double horizon = 100.0;
  std::int64_t replicates = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  std::string format = "csv";

  [[nodiscard]] std::uint64_t replicate_seed(std::int64_t i) const { return seed + static_cast<std::uint64_t>(i); }

  [[nodiscard]] std::shared_ptr<const Torus> torus() const {
    if (sides.size() == 1 && d > 1) return Torus::cube(d, M, sides[0]);
    return Torus::make(d, M, sides);
  }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["kind"] = kind;
    j["payoffs"] = payoffs.to_string();
    j["d"] = d;
    j["M"] = M;
    j["sides"] = sides;
    j["rho"] = rho;
    j["horizon"] = horizon;
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["format"] = format;
    return j;
  }
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads; results are stored by index.
/// The exception of the lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::int64_t n, int workers, Fn fn) -> std::vector<decltype(fn(std::int64_t{}))> {
  using R = decltype(fn(std::int64_t{}));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::int64_t>(n, 1))));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct EstimateRecord {
  std::string event;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double estimate = 0.0;
  stats::Interval interval;

  [[nodiscard]] Json to_json() const {
    return Json{{"event", event},     {"successes", successes},       {"trials", trials},
                {"estimate", estimate}, {"lower", interval.lower}, {"upper", interval.upper}};
  }
};

inline EstimateRecord make_estimate(std::string event, std::int64_t successes, std::int64_t trials) {
  EstimateRecord r{std::move(event), successes, trials, 0.0, {}};
  r.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  r.interval = stats::wilson(successes, trials);
  return r;
}

/// Bernoulli estimate over replicates seeded base_seed + i.
inline EstimateRecord estimate_by_seed(const std::string& event, std::int64_t replicates, std::uint64_t base_seed,
                                       int workers, const std::function<bool(std::uint64_t)>& trial) {
  if (replicates < 1) throw std::invalid_argument("replicate count must be at least 1");
  const auto hits = parallel_map(replicates, workers, [&](std::int64_t i) -> int {
    const std::uint64_t s = base_seed + static_cast<std::uint64_t>(i);
    try {
      return trial(s) ? 1 : 0;
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate seed " + std::to_string(s) + ": " + e.what());
    }
  });
  std::int64_t k = 0;
  for (int h : hits) k += h;
  return make_estimate(event, k, replicates);
}

/// Product-measure start and one simulated trajectory for replicate seed s.
inline Trajectory simulate_replicate(const ExperimentConfig& cfg, std::uint64_t s, LogMode log = LogMode::kNone) {
  const auto xi0 = sample_product_measure(cfg.rho, cfg.torus(), s);
  RunOptions ro;
  ro.horizon = cfg.horizon;
  ro.log = log;
  return run(xi0, cfg.payoffs, s, ro);
}

inline EstimateRecord estimate(const std::string& event, const ExperimentConfig& cfg,
                               const std::function<bool(const Trajectory&)>& pred, LogMode log = LogMode::kNone) {
  return estimate_by_seed(event, cfg.replicates, cfg.seed, cfg.workers,
                          [&](std::uint64_t s) { return pred(simulate_replicate(cfg, s, log)); });
}

// ---------------------------------------------------------------------------
// Outcomes and phase sweeps

enum class RunOutcome { kStrategy1Wins, kStrategy2Wins, kFixatesMixed, kUndecided };

inline const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::kStrategy1Wins: return "s1-wins";
    case RunOutcome::kStrategy2Wins: return "s2-wins";
    case RunOutcome::kFixatesMixed: return "fixates-mixed";
    case RunOutcome::kUndecided: return "undecided";
  }
  return "?";
}

inline RunOutcome classify_run(const Trajectory& tr) {
  if (!tr.absorbed) return RunOutcome::kUndecided;
  const auto n1 = tr.final_state.count(Strategy::kOne);
  if (n1 == tr.final_state.size()) return RunOutcome::kStrategy1Wins;
  if (n1 == 0) return RunOutcome::kStrategy2Wins;
  return RunOutcome::kFixatesMixed;
}

struct PhaseCell {
  Rational a11, a22;
  GameClass game;
  RegionPredicates regions;
  std::optional<mean_field::Outcome> mean_field;
  bool skipped = false;
  std::array<std::int64_t, 4> counts{};  // indexed by RunOutcome
};

struct PhaseSweepSpec {
  Rational a12, a21;
  std::vector<Rational> a11_grid;
  std::vector<Rational> a22_grid;
  bool include_boundary = false;
};

/// Every pure-growth run that started with at least one 1 must end with
/// strategy 1 everywhere; anything else is a simulator defect.
inline void check_pure_growth(const Trajectory& tr, std::uint64_t seed) {
  if (tr.initial.count(Strategy::kOne) == 0) return;
  if (classify_run(tr) == RunOutcome::kStrategy2Wins) {
    throw std::logic_error("pure-growth cell reported strategy 2 winning (seed " + std::to_string(seed) + ")");
  }
}

inline std::vector<PhaseCell> phase_sweep(const PhaseSweepSpec& spec, const ExperimentConfig& cfg) {
  std::vector<PhaseCell> cells;
  const NeighborhoodSpec ns(cfg.d, cfg.M);
  for (const auto& a22 : spec.a22_grid) {
    for (const auto& a11 : spec.a11_grid) {
      PhaseCell c;
      c.a11 = a11;
      c.a22 = a22;
      const PayoffMatrix p{a11, spec.a12, spec.a21, a22};
      c.game = classify_game(p);
      c.regions = region_predicates(p, ns);
      const auto dp = derive_params(p);
      if (cfg.rho > 0.0 && cfg.rho < 1.0 && dp.a1.sign() != 0 && dp.a2.sign() != 0) {
        const auto u0 = Rational(static_cast<std::int64_t>(std::llround(cfg.rho * 1e6)), 1'000'000);
        c.mean_field = mean_field::classify_outcome(dp, u0).outcome;
      }
      c.skipped = c.game.boundary && !spec.include_boundary;
      if (!c.skipped) {
        ExperimentConfig cc = cfg;
        cc.payoffs = p;
        const auto outcomes = parallel_map(cfg.replicates, cfg.workers, [&](std::int64_t i) {
          const auto s = cc.replicate_seed(i);
          const auto tr = simulate_replicate(cc, s);
          if (c.regions.pure_growth) check_pure_growth(tr, s);
          return classify_run(tr);
        });
        for (auto o : outcomes) ++c.counts[static_cast<std::size_t>(o)];
      }
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

/// a, a + step, ..., b (inclusive) as exact rationals from "a:b:count".
inline std::vector<Rational> rational_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw std::invalid_argument("grid must look like lo:hi:count");
  const Rational lo = Rational::parse(spec.substr(0, c1));
  const Rational hi = Rational::parse(spec.substr(c1 + 1, c2 - c1 - 1));
  const long count = std::stol(spec.substr(c2 + 1));
  if (count < 1) throw std::invalid_argument("grid count must be positive");
  if (count == 1) return {lo};
  std::vector<Rational> out;
  for (long k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * Rational(k, count - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Block events on the line

/// Integer sites strictly inside center + (-half, half) with half = num / 2.
inline std::vector<std::int64_t> open_window(std::int64_t center, std::int64_t twice_half, std::int64_t L) {
  std::vector<std::int64_t> out;
  for (std::int64_t x = -twice_half; x <= twice_half; ++x) {
    if (2 * std::abs(x) < twice_half) out.push_back(((center + x) % L + L) % L);
  }
  return out;
}

/// Waiting time until nine heads in a row, heads with probability 1/3,
/// tosses at the events of a rate-3/2 Poisson process.
inline double sample_tau9(Rng& rng) {
  double t = 0.0;
  int run = 0;
  while (run < 9) {
    t += rng.exponential(1.5);
    run = rng.bernoulli(1.0 / 3.0) ? run + 1 : 0;
  }
  return t;
}

inline double tau9_quantile(double q, std::int64_t samples, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7a09));
  std::vector<double> v(static_cast<std::size_t>(samples));
  for (auto& x : v) x = sample_tau9(rng);
  std::sort(v.begin(), v.end());
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples))) - 1;
  return v[std::min(k, v.size() - 1)];
}

struct BlockDiagnosticsSpec {
  int M = 16;
  int blocks = 4;                // torus length 7M * blocks
  std::optional<double> T;       // default: twice the 99th percentile of tau9
  std::int64_t tau_samples = 2000;
  double rho = 0.5;
};

struct BlockEventSummary {
  int M = 0;
  std::int64_t L = 0;
  double T = 0.0;
  std::int64_t size_A = 0;
  std::int64_t size_B = 0;
  double log_M = 0.0;
  std::int64_t replicates = 0;
  std::array<std::int64_t, 5> hits{};  // D1, D2, D3, D4 and the final count event, each within the previous ones
  std::int64_t good_both = 0;          // (0,0) and (1,1) good
  bool small_M = false;
  std::vector<EstimateRecord> estimates;
  std::vector<double> bounds;  // lemma bound per estimate, NaN where none is asserted
};

/// Chronological block events over one time step of length T, starting from
/// a product measure, with the conditional frequencies and their bounds.
inline BlockEventSummary block_event_diagnostics(const PayoffMatrix& p, const BlockDiagnosticsSpec& spec,
                                                 std::int64_t replicates, std::uint64_t seed, int workers = 1) {
  if (!region_predicates(p, NeighborhoodSpec(1, spec.M)).symmetric_coexistence) {
    throw std::invalid_argument("block diagnostics need a11 = a22 < a12 = a21");
  }
  BlockEventSummary s;
  s.M = spec.M;
  s.L = 7LL * spec.M * spec.blocks;
  s.T = spec.T ? *spec.T : 2.0 * tau9_quantile(0.99, spec.tau_samples, seed);
  s.log_M = std::log(static_cast<double>(spec.M));
  s.small_M = spec.M < 8;
  s.replicates = replicates;
  const auto B0 = open_window(0, 7LL * spec.M, s.L);
  const auto B1 = open_window(7LL * spec.M, 7LL * spec.M, s.L);
  const auto A1 = open_window(7LL * spec.M, 3LL * spec.M, s.L);
  s.size_A = static_cast<std::int64_t>(A1.size());
  s.size_B = static_cast<std::int64_t>(B0.size());
  const double sqrtM = std::sqrt(static_cast<double>(spec.M));
  const auto torus = Torus::make(1, spec.M, {static_cast<int>(s.L)});

  struct Flags {
    std::array<bool, 5> d{};
    bool good11 = false;
  };
  const auto flags = parallel_map(replicates, workers, [&](std::int64_t i) {
    const std::uint64_t rs = seed + static_cast<std::uint64_t>(i);
    Flags f;
    const auto xi0 = sample_product_measure(spec.rho, torus, rs);
    Simulator sim(xi0, p, rs, {.track_absorption = false});
    RunOptions ro;
    ro.horizon = s.T;
    ro.stop_on_absorption = false;
    ro.log = LogMode::kFlips;
    const auto tr = sim.run(ro);
    const auto final_B1 = region_counts(tr.final_state, B1);
    f.d[0] = static_cast<double>(region_counts(xi0, B0).minority()) > s.log_M;
    f.good11 = static_cast<double>(final_B1.minority()) > s.log_M;
    // D2: B0 never monochromatic during (0, T)
    std::vector<std::uint8_t> inB0(static_cast<std::size_t>(s.L), 0), inB1(static_cast<std::size_t>(s.L), 0);
    for (auto x : B0) inB0[x] = 1;
    for (auto x : B1) inB1[x] = 1;
    auto c0 = region_counts(xi0, B0);
    auto c1 = region_counts(xi0, B1);
    bool d2 = c0.minority() > 0, d4 = static_cast<double>(c1.minority()) > sqrtM;
    for (const auto& e : tr.log) {
      if (inB0[e.site]) {
        (e.old_strategy == Strategy::kOne ? c0.n1 : c0.n2) -= 1;
        (e.new_strategy == Strategy::kOne ? c0.n1 : c0.n2) += 1;
        if (c0.minority() == 0) d2 = false;
      }
      if (inB1[e.site]) {
        (e.old_strategy == Strategy::kOne ? c1.n1 : c1.n2) -= 1;
        (e.new_strategy == Strategy::kOne ? c1.n1 : c1.n2) += 1;
        if (static_cast<double>(c1.minority()) > sqrtM) d4 = true;
      }
    }
    const auto tA = first_hitting_time(tr, A1, HittingKind::kMixed);
    f.d[1] = d2;
    f.d[2] = tA.has_value() && *tA <= s.T / 2.0;
    f.d[3] = d4;
    f.d[4] = f.good11;
    return f;
  });
  for (const auto& f : flags) {
    bool chain = true;
    for (std::size_t k = 0; k < 5; ++k) {
      chain = chain && f.d[k];
      if (chain) ++s.hits[k];
    }
    if (f.d[0] && f.good11) ++s.good_both;
  }
  const double nan = std::nan("");
  auto add = [&](const std::string& name, std::int64_t k, std::int64_t n, double bound) {
    if (n == 0) return;
    s.estimates.push_back(make_estimate(name, k, n));
    s.bounds.push_back(bound);
  };
  const double keep_one = 1.0 - 2.0 * std::pow(1.0 - std::exp(-s.T), s.log_M);
  const double keep_more = 1.0 - 2.0 * std::exp(-std::exp(-s.T) * sqrtM / 8.0);
  add("D1", s.hits[0], replicates, nan);
  add("D2|D1", s.hits[1], s.hits[0], keep_one);
  add("D3|D1,D2", s.hits[2], s.hits[1], 0.99);
  add("D4|D1..D3", s.hits[3], s.hits[2], 1.0 - 2.0 / sqrtM);
  add("good(1,1)|D1..D4", s.hits[4], s.hits[3], keep_more);
  add("good(1,1)|good(0,0)", s.good_both, s.hits[0], 0.8);
  return s;
}

// ---------------------------------------------------------------------------
// Coexistence at finite range

struct CoexistenceResult {
  std::vector<Sample> samples;
  double final_minority = 0.0;
  double final_interface_density = 0.0;
  bool persistent = false;
};

inline CoexistenceResult coexistence_run(const PayoffMatrix& p, int M, int L, double rho, double horizon,
                                         std::uint64_t seed, double sample_interval = 10.0, double floor = 0.01) {
  if (L % (7 * M) != 0) throw std::invalid_argument("L must be a multiple of 7M");
  const auto torus = Torus::make(1, M, {L});
  Simulator sim(sample_product_measure(rho, torus, seed), p, seed, {.track_absorption = false});
  RunOptions ro;
  ro.horizon = horizon;
  ro.stop_on_absorption = false;
  ro.log = LogMode::kNone;
  ro.sample_interval = sample_interval;
  auto tr = sim.run(ro);
  CoexistenceResult r;
  r.samples = std::move(tr.samples);
  const auto n1 = tr.final_state.count(Strategy::kOne);
  r.final_minority = static_cast<double>(std::min(n1, L - n1)) / L;
  r.final_interface_density = interface_density(tr.final_state).to_double();
  r.persistent = r.final_minority > floor;
  return r;
}

// ---------------------------------------------------------------------------
// Output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  Json metadata = Json::object();
};

inline std::string cell_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

inline void emit_csv(std::ostream& os, const Table& t) {
  for (const auto& [k, v] : t.metadata.items()) os << "# " << k << ": " << cell_text(v) << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

inline void emit_json(std::ostream& os, const Table& t) {
  Json j;
  j["metadata"] = t.metadata;
  j["columns"] = t.columns;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  os << j.dump(2) << '\n';
}

/// Writes to `path`, or to standard output when it is empty or "-".
inline void emit(const Table& t, const std::string& format, const std::string& path) {
  if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
  auto write = [&](std::ostream& os) { format == "csv" ? emit_csv(os, t) : emit_json(os, t); };
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

inline Json pattern_report(const Pattern& sigma, const PayoffMatrix& p, const AbsorbingReport* chain = nullptr) {
  const auto st = is_stable_pattern(sigma, p);
  Json j;
  j["pattern"] = to_digits(sigma.word);
  j["context"] = {to_digits({sigma.left[0], sigma.left[1]}), to_digits({sigma.right[0], sigma.right[1]})};
  j["payoffs"] = p.to_string();
  j["stable"] = st.stable;
  Json rates = Json::array();
  for (const auto& r : st.flip_rates) rates.push_back(r.to_string());
  j["flip_rates"] = std::move(rates);
  Json path = Json::array();
  if (chain && static_cast<int>(sigma.word.size()) == chain->length) {
    for (const auto& w : witness_path(*chain, sigma.word)) path.push_back(to_digits(w));
  }
  j["witness_path"] = std::move(path);
  return j;
}

}  // namespace dbf
