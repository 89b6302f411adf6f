#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace dbf {

/// SplitMix64 finalizer; used to derive independent sub-seeds from one seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Random source with fully specified transforms: std::mt19937_64 is
/// bit-identical everywhere, the standard distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform on the open interval (0, 1).
  double open01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  bool coin() { return (eng_() >> 63) != 0; }

  /// Exponential with the given rate; always strictly positive.
  double exponential(double rate) { return -std::log(open01()) / rate; }

  /// Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

 private:
  std::mt19937_64 eng_;
};

/// One update of the graphical representation.
struct Event {
  std::int64_t site = 0;
  double time = 0.0;
  bool coin_picks_one = false;  // tie-breaking coin: adopt strategy 1 when set
};

/// Stream of update events for `sites` players with independent rate-1 clocks.
///
/// The superposition of the per-site clocks is a Poisson process of rate
/// `sites` whose marks are uniform sites; each event carries its own fair coin.
class EventSource {
 public:
  EventSource(std::uint64_t seed, std::int64_t sites, bool invert_coins = false)
      : rng_(derive_seed(seed, 0xe7e47)), sites_(sites), invert_(invert_coins) {}

  Event next() {
    Event e;
    double t = time_ + rng_.exponential(static_cast<double>(sites_));
    if (!(t > time_)) t = std::nextafter(time_, std::numeric_limits<double>::infinity());
    time_ = t;
    e.time = t;
    e.site = static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(sites_)));
    e.coin_picks_one = rng_.coin() != invert_;
    return e;
  }

  [[nodiscard]] double time() const { return time_; }
  [[nodiscard]] std::int64_t sites() const { return sites_; }

 private:
  Rng rng_;
  std::int64_t sites_;
  bool invert_;
  double time_ = 0.0;
};

}  // namespace dbf
