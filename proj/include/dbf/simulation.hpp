#pragma once

#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dbf/events.hpp"
#include "dbf/lattice.hpp"

namespace dbf {

/// Each site independently strategy 1 with probability rho.
inline Configuration sample_product_measure(double rho, std::shared_ptr<const Torus> torus, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  Rng rng(derive_seed(seed, 0x1a7));
  std::vector<Strategy> cells(static_cast<std::size_t>(torus->size()));
  for (auto& c : cells) c = rng.bernoulli(rho) ? Strategy::kOne : Strategy::kTwo;
  return {std::move(torus), std::move(cells)};
}

struct EventRecord {
  double time = 0.0;
  std::int64_t site = 0;
  Strategy old_strategy = Strategy::kOne;
  Strategy new_strategy = Strategy::kOne;
  bool tie = false;  // decided by the coin
  [[nodiscard]] bool flipped() const { return old_strategy != new_strategy; }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class LogMode { kNone, kFlips, kAll };

struct RunOptions {
  double horizon = 100.0;
  bool stop_on_absorption = true;
  LogMode log = LogMode::kFlips;
  double sample_interval = 0.0;  // 0 disables periodic samples
};

struct Sample {
  double time = 0.0;
  std::int64_t n1 = 0;
  std::int64_t interfaces = -1;  // d = 1 only
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Trajectory {
  Configuration initial;
  Configuration final_state;
  std::vector<EventRecord> log;
  std::vector<Sample> samples;
  double end_time = 0.0;
  std::uint64_t events = 0;
  std::uint64_t flips = 0;
  bool absorbed = false;
};

inline bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.initial == b.initial && a.final_state == b.final_state && a.log == b.log && a.samples == b.samples &&
         a.end_time == b.end_time && a.events == b.events && a.flips == b.flips && a.absorbed == b.absorbed;
}

struct SimulatorOptions {
  bool track_absorption = true;
  bool invert_coins = false;  // complements every tie coin (label-swap coupling)
};

/// Event-driven simulation of the process on a torus.
///
/// Keeps the number of type-1 neighbors of every site so that one update
/// costs O(N). With absorption tracking on, the set of sites with positive
/// flip rate is maintained by rechecking the 2M-ball of each flipped site.
class Simulator {
 public:
  using Observer = std::function<void(const Simulator&, const EventRecord&)>;

  Simulator(Configuration init, const PayoffMatrix& p, std::uint64_t seed, SimulatorOptions opts = {})
      : state_(std::move(init)),
        scores_(p),
        source_(seed, state_.size(), opts.invert_coins),
        track_(opts.track_absorption) {
    const auto& t = state_.torus();
    n1_.resize(static_cast<std::size_t>(t.size()));
    for (std::int64_t x = 0; x < t.size(); ++x) {
      n1_[x] = static_cast<std::int32_t>(count_type1_neighbors(x, state_));
      total1_ += state_[x] == Strategy::kOne;
    }
    if (t.d() == 1) {
      for (std::int64_t x = 0; x < t.size(); ++x) interfaces_ += state_[x] != state_[(x + t.size() - 1) % t.size()];
    }
    if (track_) {
      const int r = 2 * t.M();
      const auto ball_size = static_cast<std::size_t>(t.ball(0, r).size());
      ball_.resize(static_cast<std::size_t>(t.size()) * ball_size);
      for (std::int64_t x = 0; x < t.size(); ++x) {
        const auto b = t.ball(x, r);
        std::copy(b.begin(), b.end(), ball_.begin() + x * static_cast<std::int64_t>(ball_size));
      }
      ball_size_ = ball_size;
      active_.assign(static_cast<std::size_t>(t.size()), 0);
      for (std::int64_t x = 0; x < t.size(); ++x) {
        active_[x] = rate_at(x) != FlipKind::kZero;
        active_count_ += active_[x];
      }
    }
  }

  [[nodiscard]] const Configuration& state() const { return state_; }
  [[nodiscard]] double time() const { return time_; }
  [[nodiscard]] std::int64_t count(Strategy s) const {
    return s == Strategy::kOne ? total1_ : state_.size() - total1_;
  }
  [[nodiscard]] std::int64_t interfaces() const { return interfaces_; }
  [[nodiscard]] std::int64_t type1_neighbors(std::int64_t x) const { return n1_[x]; }

  [[nodiscard]] bool is_absorbed() const {
    if (!track_) throw std::logic_error("absorption tracking is disabled for this simulator");
    return active_count_ == 0;
  }

  [[nodiscard]] FlipKind rate_at(std::int64_t x) const {
    const auto& t = state_.torus();
    BestPayoffs best;
    for (auto z : t.neighbors_of(x)) best.offer(state_[z], scores_.score(state_[z], n1_[z], t.N()));
    return best.rate_away_from(state_[x]);
  }

  /// Time of the next event without consuming it.
  double peek_time() { return pending().time; }

  EventRecord step() {
    const Event e = pending();
    pending_.reset();
    time_ = e.time;
    EventRecord rec;
    rec.time = e.time;
    rec.site = e.site;
    rec.old_strategy = state_[e.site];
    rec.new_strategy = rec.old_strategy;
    switch (rate_at(e.site)) {
      case FlipKind::kZero: break;
      case FlipKind::kOne: rec.new_strategy = opposite(rec.old_strategy); break;
      case FlipKind::kHalf:
        rec.tie = true;
        rec.new_strategy = e.coin_picks_one ? Strategy::kOne : Strategy::kTwo;
        break;
    }
    if (rec.flipped()) apply_flip(e.site, rec.new_strategy);
    return rec;
  }

  /// Steps until the next event would fall after the horizon, or until
  /// absorption when requested.
  Trajectory run(const RunOptions& opts, const Observer& observer = {}) {
    if (!(opts.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (opts.stop_on_absorption && !track_) throw std::logic_error("stop-on-absorption needs absorption tracking");
    Trajectory tr{state_, state_, {}, {}, time_, 0, 0, false};
    double next_sample = opts.sample_interval > 0.0 ? time_ : std::numeric_limits<double>::infinity();
    auto sample_until = [&](double t) {
      while (next_sample <= t && next_sample <= opts.horizon) {
        tr.samples.push_back({next_sample, total1_, state_.torus().d() == 1 ? interfaces_ : -1});
        next_sample += opts.sample_interval;
      }
    };
    while (true) {
      if (opts.stop_on_absorption && active_count_ == 0) {
        tr.absorbed = true;
        break;
      }
      const double t = peek_time();
      if (t > opts.horizon) break;
      sample_until(std::nextafter(t, 0.0));
      const auto rec = step();
      ++tr.events;
      if (rec.flipped()) ++tr.flips;
      if (opts.log == LogMode::kAll || (opts.log == LogMode::kFlips && rec.flipped())) tr.log.push_back(rec);
      if (observer) observer(*this, rec);
    }
    sample_until(opts.horizon);
    if (track_ && active_count_ == 0) tr.absorbed = true;
    tr.end_time = tr.absorbed ? time_ : opts.horizon;
    tr.final_state = state_;
    return tr;
  }

 private:
  const Event& pending() {
    if (!pending_) pending_ = source_.next();
    return *pending_;
  }

  void apply_flip(std::int64_t x, Strategy s) {
    const auto& t = state_.torus();
    const std::int32_t delta = s == Strategy::kOne ? 1 : -1;
    if (t.d() == 1) {
      const auto L = t.size();
      const auto l = (x + L - 1) % L, r = (x + 1) % L;
      interfaces_ -= (state_[l] != state_[x]) + (state_[r] != state_[x]);
      interfaces_ += (state_[l] != s) + (state_[r] != s);
    }
    state_.set(x, s);
    total1_ += delta;
    for (auto z : t.neighbors_of(x)) n1_[z] += delta;
    if (track_) {
      const auto* b = ball_.data() + x * static_cast<std::int64_t>(ball_size_);
      for (std::size_t i = 0; i < ball_size_; ++i) {
        const auto y = b[i];
        const std::uint8_t now = rate_at(y) != FlipKind::kZero;
        active_count_ += static_cast<std::int64_t>(now) - active_[y];
        active_[y] = now;
      }
    }
  }

  Configuration state_;
  ScoreTable scores_;
  EventSource source_;
  bool track_;
  std::optional<Event> pending_;
  double time_ = 0.0;
  std::vector<std::int32_t> n1_;
  std::int64_t total1_ = 0;
  std::int64_t interfaces_ = 0;
  std::vector<std::int64_t> ball_;
  std::size_t ball_size_ = 0;
  std::vector<std::uint8_t> active_;
  std::int64_t active_count_ = 0;
};

/// Convenience wrapper: simulate from xi0 with the given options.
inline Trajectory run(const Configuration& xi0, const PayoffMatrix& p, std::uint64_t seed, const RunOptions& opts,
                      const Simulator::Observer& observer = {}) {
  Simulator sim(xi0, p, seed, {.track_absorption = opts.stop_on_absorption});
  return sim.run(opts, observer);
}

/// Applies every logged flip with time <= until to the initial configuration.
inline Configuration replay(const Trajectory& tr, double until = std::numeric_limits<double>::infinity()) {
  Configuration xi = tr.initial;
  for (const auto& e : tr.log) {
    if (e.time > until) break;
    if (xi[e.site] != e.old_strategy) throw std::runtime_error("trajectory log is inconsistent with its initial state");
    xi.set(e.site, e.new_strategy);
  }
  return xi;
}

enum class HittingKind { kMixed, kHasOne, kHasTwo };

/// First time (scanning the flip log) at which the region B is mixed, or
/// contains a site of the requested strategy; nullopt if never.
inline std::optional<double> first_hitting_time(const Trajectory& tr, std::span<const std::int64_t> B,
                                                HittingKind kind) {
  const std::unordered_set<std::int64_t> members(B.begin(), B.end());
  const std::vector<std::int64_t> unique(members.begin(), members.end());
  RegionCounts rc = region_counts(tr.initial, unique);
  auto holds = [&] {
    switch (kind) {
      case HittingKind::kMixed: return rc.n1 > 0 && rc.n2 > 0;
      case HittingKind::kHasOne: return rc.n1 > 0;
      case HittingKind::kHasTwo: return rc.n2 > 0;
    }
    return false;
  };
  if (holds()) return 0.0;
  for (const auto& e : tr.log) {
    if (!e.flipped() || !members.contains(e.site)) continue;
    (e.old_strategy == Strategy::kOne ? rc.n1 : rc.n2) -= 1;
    (e.new_strategy == Strategy::kOne ? rc.n1 : rc.n2) += 1;
    if (holds()) return e.time;
  }
  return std::nullopt;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "time,site,old,new,tie\n";
  char buf[64];
  for (const auto& e : tr.log) {
    std::snprintf(buf, sizeof buf, "%.17g", e.time);
    os << buf << ',' << e.site << ',' << to_int(e.old_strategy) << ',' << to_int(e.new_strategy) << ','
       << (e.tie ? 1 : 0) << '\n';
  }
}

}  // namespace dbf
