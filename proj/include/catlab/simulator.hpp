// Monte Carlo layer. Everything here resamples the mechanism directly
// (reproduction flips, sequential kills, ball placement); nothing reuses the
// closed forms from analytic.hpp, so the two layers can check each other.
//
// Two tiers:
//   * plain samplers that mirror the process definition step by step, used
//     by tests as the ground truth for the fast path;
//   * ColonySampler, an O(1)-per-colony engine (alias-table geometrics,
//     bit-trick occupancy draws) used by simulate_extinction / estimate_psi
//     so 100k-replication runs finish in seconds on one core.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "catlab/model.hpp"
#include "catlab/rng.hpp"

namespace catlab {

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

enum class SimMode { EmbeddedChain, ContinuousTime };

struct SimConfig {
  std::uint64_t replications = 100000;
  std::uint64_t colony_cap = 10000;      // individuals (or colonies) alive
  std::uint64_t generation_cap = 10000;  // catastrophe cycles
  std::uint64_t seed = 1;
  SimMode mode = SimMode::EmbeddedChain;
};

inline void validate_sim_config(const SimConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("replications must be >= 1");
  if (cfg.colony_cap < 1) throw std::invalid_argument("colony_cap must be >= 1");
  if (cfg.generation_cap < 1)
    throw std::invalid_argument("generation_cap must be >= 1");
}

enum class OutcomeKind { Extinct, CapSurvive };

struct SimOutcome {
  OutcomeKind kind = OutcomeKind::Extinct;
  std::uint64_t generations = 0;  // catastrophe cycles until absorption / cap
};

struct SimEstimate {
  double psi_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t replications = 0;
  std::uint64_t extinct = 0;
  std::uint64_t cap_survive = 0;
  bool cap_bias_note = false;  // set when any replication hit a cap
};

// ---------------------------------------------------------------------------
// Plain mechanism samplers (slow, obviously-correct; ground truth in tests)
// ---------------------------------------------------------------------------

// Individuals present when the catastrophe strikes: the founder plus a
// geometric number of births, one flip of probability c = lambda/(lambda+1)
// per event slot.
inline long long sample_colony_size_at_catastrophe(const ModelParams& mp,
                                                   Xoshiro256pp& rng) {
  const double c = mp.lambda / (mp.lambda + 1.0);
  long long size = 1;
  while (rng.uniform01() < c) ++size;
  return size;
}

// Geometric catastrophe: kill one individual at a time (probability q each),
// stop at the first survivor; the survivor and everyone behind it live.
inline long long sample_survivors_given_size(long long size,
                                             const ModelParams& mp,
                                             Xoshiro256pp& rng) {
  long long killed = 0;
  while (killed < size && rng.uniform01() < mp.q()) ++killed;
  return size - killed;
}

inline long long sample_survivors(const ModelParams& mp, Xoshiro256pp& rng) {
  return sample_survivors_given_size(sample_colony_size_at_catastrophe(mp, rng),
                                     mp, rng);
}

// Number of sites occupied when `survivors` individuals are placed according
// to the scheme. Direct simulation of the placement, any d >= 2.
inline int sample_occupancy(const DispersionScheme& scheme, long long survivors,
                            Xoshiro256pp& rng) {
  if (!scheme.disperses())
    throw std::invalid_argument("occupancy needs a dispersing scheme");
  if (survivors < 0) throw std::invalid_argument("survivors must be >= 0");
  const int d = scheme.d;
  if (survivors == 0) return 0;
  switch (scheme.kind) {
    case SchemeKind::Optimal:
      return static_cast<int>(
          std::min<long long>(survivors, static_cast<long long>(d)));
    case SchemeKind::Independent: {
      std::vector<char> hit(static_cast<std::size_t>(d), 0);
      int distinct = 0;
      for (long long i = 0; i < survivors && distinct < d; ++i) {
        const auto site =
            static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(d)));
        if (!hit[site]) {
          hit[site] = 1;
          ++distinct;
        }
      }
      return distinct;
    }
    case SchemeKind::Uniform: {
      // Uniform composition of `survivors` into d labelled parts: choose a
      // (d-1)-subset of bar positions among survivors + d - 1 slots
      // (Floyd's algorithm), then count the nonempty parts.
      const long long slots = survivors + d - 1;
      std::vector<long long> bars;
      bars.reserve(static_cast<std::size_t>(d - 1));
      for (long long j = slots - (d - 1); j < slots; ++j) {
        const auto t = static_cast<long long>(
            rng.bounded(static_cast<std::uint64_t>(j + 1)));
        if (std::find(bars.begin(), bars.end(), t) != bars.end())
          bars.push_back(j);
        else
          bars.push_back(t);
      }
      std::sort(bars.begin(), bars.end());
      int nonempty = 0;
      long long prev = -1;
      for (int k = 0; k < d - 1; ++k) {
        if (bars[static_cast<std::size_t>(k)] - prev > 1) ++nonempty;
        prev = bars[static_cast<std::size_t>(k)];
      }
      if (slots - 1 - prev > 0) ++nonempty;
      return nonempty;
    }
    default:
      throw std::logic_error("unreachable scheme kind");
  }
}

// One full cycle: grow, catastrophe, disperse; returns the offspring colony
// count (0..d).
inline int sample_offspring_colonies(const DispersionScheme& scheme,
                                     const ModelParams& mp, Xoshiro256pp& rng) {
  if (!scheme.disperses())
    throw std::invalid_argument("offspring draw needs a dispersing scheme");
  const long long n = sample_survivors(mp, rng);
  return sample_occupancy(scheme, n, rng);
}

// ---------------------------------------------------------------------------
// Fast path: alias-table geometrics + O(1) occupancy draws
// ---------------------------------------------------------------------------

namespace detail {

// Walker alias table over {0,...,n-1} with a power-of-two entry count so a
// single 64-bit draw supplies both the slot index and the accept fraction.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    std::size_t n = 1;
    bits_ = 0;
    while (n < weights.size()) {
      n <<= 1;
      ++bits_;
    }
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i)
      scaled[i] = weights[i] / total * static_cast<double>(n);

    cut_.assign(n, ~0ull);
    alias_.assign(n, 0);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      alias_[i] = static_cast<std::uint32_t>(i);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      cut_[s] = to_fixed(scaled[s]);
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        small.push_back(l);
        large.pop_back();
      }
    }
    // Leftovers are within rounding of 1; they keep cut = max (always self).
  }

  std::uint32_t draw(Xoshiro256pp& rng) const {
    const std::uint64_t r = rng.next();
    const auto idx = static_cast<std::size_t>(bits_ ? (r >> (64 - bits_)) : 0);
    const std::uint64_t frac = bits_ ? (r << bits_) : r;
    return frac < cut_[idx] ? static_cast<std::uint32_t>(idx) : alias_[idx];
  }

 private:
  static std::uint64_t to_fixed(double x) {
    if (x >= 1.0) return ~0ull;
    if (x <= 0.0) return 0;
    return static_cast<std::uint64_t>(x * 0x1.0p64);
  }

  std::vector<std::uint64_t> cut_;
  std::vector<std::uint32_t> alias_;
  unsigned bits_ = 0;
};

// Geometric sampler (number of failures before the first success at rate
// 1 - ratio): alias table over {0,...,T-1} plus a sentinel bucket carrying
// the whole tail mass ratio^T; on sentinel, add T and redraw (memoryless).
class GeometricSampler {
 public:
  GeometricSampler() = default;

  explicit GeometricSampler(double ratio) {
    constexpr std::size_t T = 511;
    std::vector<double> w(T + 1);
    double mass = 1.0 - ratio;
    for (std::size_t g = 0; g < T; ++g) {
      w[g] = mass;
      mass *= ratio;
    }
    w[T] = mass / (1.0 - ratio);  // ratio^T, the tail
    table_ = AliasTable(w);
  }

  std::uint64_t draw(Xoshiro256pp& rng) const {
    std::uint64_t base = 0;
    for (;;) {
      const std::uint32_t v = table_.draw(rng);
      if (v != 511) return base + v;
      base += 511;
    }
  }

 private:
  AliasTable table_;
};

// Failures before the first success at probability 1/2, from the trailing
// zeros of raw 64-bit words.
inline int geometric_half(Xoshiro256pp& rng) {
  int base = 0;
  for (;;) {
    const std::uint64_t r = rng.next();
    if (r) return base + __builtin_ctzll(r);
    base += 64;
  }
}

}  // namespace detail

// Draws one colony cycle in O(1): survivor count via two geometric draws,
// then occupancy without touching the individual balls.
class ColonySampler {
 public:
  ColonySampler(const DispersionScheme& scheme, const ModelParams& mp)
      : scheme_(scheme),
        births_(mp.lambda / (mp.lambda + 1.0)),
        kills_(1.0 - mp.p),
        gap_first_(1.0 / 3.0),   // success 2/3: a ball avoiding one used site
        gap_second_(2.0 / 3.0) {}  // success 1/3: a ball hitting the one free site

  const DispersionScheme& scheme() const { return scheme_; }

  // Survivors of one grow-then-catastrophe cycle starting from one founder.
  long long survivors(Xoshiro256pp& rng) const {
    const auto size = static_cast<long long>(births_.draw(rng)) + 1;
    const auto killed = static_cast<long long>(kills_.draw(rng));
    return size - std::min(size, killed);
  }

  // Growth increment for a colony that is not reset by dispersal (the
  // no-dispersion chain): births between consecutive catastrophes.
  long long births(Xoshiro256pp& rng) const {
    return static_cast<long long>(births_.draw(rng));
  }

  long long kills(Xoshiro256pp& rng) const {
    return static_cast<long long>(kills_.draw(rng));
  }

  // Occupied sites when n survivors are placed. Matches sample_occupancy in
  // distribution; d in {2,3} runs without per-ball work.
  int occupancy(long long n, Xoshiro256pp& rng) const {
    if (n <= 0) return 0;
    const int d = scheme_.d;
    switch (scheme_.kind) {
      case SchemeKind::Optimal:
        return static_cast<int>(
            std::min<long long>(n, static_cast<long long>(d)));
      case SchemeKind::Independent:
        if (n == 1) return 1;
        if (d == 2) {
          // Balls after the first miss its site with probability 1/2; the
          // gap to the first miss is geometric(1/2).
          return 1 + (detail::geometric_half(rng) <= n - 2 ? 1 : 0);
        }
        if (d == 3) {
          // Gap to the first ball leaving site 1 (rate 2/3), then gap to the
          // first ball hitting the last free site (rate 1/3).
          const auto g1 = static_cast<long long>(gap_first_.draw(rng));
          if (g1 > n - 2) return 1;
          const auto g2 = static_cast<long long>(gap_second_.draw(rng));
          return 2 + (g2 <= n - 3 - g1 ? 1 : 0);
        }
        return occupancy_balls(n, rng);
      case SchemeKind::Uniform: {
        if (d == 2) {
          // Part sizes (x, n - x) with x uniform on {0,...,n}.
          const auto x = static_cast<long long>(
              rng.bounded(static_cast<std::uint64_t>(n + 1)));
          return 2 - (x == 0 ? 1 : 0) - (x == n ? 1 : 0);
        }
        if (d == 3) {
          // Two distinct bars among n + 2 slots, as an ordered pair.
          const auto a = static_cast<long long>(
              rng.bounded(static_cast<std::uint64_t>(n + 2)));
          auto b = static_cast<long long>(
              rng.bounded(static_cast<std::uint64_t>(n + 1)));
          if (b >= a) ++b;
          const long long i = std::min(a, b), j = std::max(a, b);
          return 3 - (i == 0 ? 1 : 0) - (j == i + 1 ? 1 : 0) -
                 (j == n + 1 ? 1 : 0);
        }
        return occupancy_bars(n, rng);
      }
      default:
        throw std::logic_error("occupancy needs a dispersing scheme");
    }
  }

  int offspring(Xoshiro256pp& rng) const {
    return occupancy(survivors(rng), rng);
  }

 private:
  int occupancy_balls(long long n, Xoshiro256pp& rng) const {
    const int d = scheme_.d;
    if (d > 64) return sample_occupancy(scheme_, n, rng);
    std::uint64_t mask = 0;
    int distinct = 0;
    for (long long i = 0; i < n && distinct < d; ++i) {
      const std::uint64_t bit = 1ull
                                << rng.bounded(static_cast<std::uint64_t>(d));
      if (!(mask & bit)) {
        mask |= bit;
        ++distinct;
      }
    }
    return distinct;
  }

  int occupancy_bars(long long n, Xoshiro256pp& rng) const {
    const int d = scheme_.d;
    const long long slots = n + d - 1;
    std::vector<long long> bars;
    bars.reserve(static_cast<std::size_t>(d - 1));
    for (long long j = slots - (d - 1); j < slots; ++j) {
      const auto t =
          static_cast<long long>(rng.bounded(static_cast<std::uint64_t>(j + 1)));
      if (std::find(bars.begin(), bars.end(), t) != bars.end())
        bars.push_back(j);
      else
        bars.push_back(t);
    }
    std::sort(bars.begin(), bars.end());
    int nonempty = 0;
    long long prev = -1;
    for (int k = 0; k < d - 1; ++k) {
      if (bars[static_cast<std::size_t>(k)] - prev > 1) ++nonempty;
      prev = bars[static_cast<std::size_t>(k)];
    }
    if (slots - 1 - prev > 0) ++nonempty;
    return nonempty;
  }

  DispersionScheme scheme_;
  detail::GeometricSampler births_;
  detail::GeometricSampler kills_;
  detail::GeometricSampler gap_first_;
  detail::GeometricSampler gap_second_;
};

// ---------------------------------------------------------------------------
// Whole-lineage simulation
// ---------------------------------------------------------------------------

namespace detail {

inline SimOutcome run_replication(const ColonySampler& cs, const SimConfig& cfg,
                                  std::uint64_t replication_index) {
  Xoshiro256pp rng = Xoshiro256pp::for_replication(cfg.seed, replication_index);

  if (!cs.scheme().disperses()) {
    // Single colony tracked by head count: geometric growth between
    // catastrophes, sequential kill at each one. colony_cap bounds the head
    // count here (there is only ever one colony).
    long long size = 1;
    for (std::uint64_t gen = 1; gen <= cfg.generation_cap; ++gen) {
      size += cs.births(rng);
      if (size >= static_cast<long long>(cfg.colony_cap))
        return {OutcomeKind::CapSurvive, gen};
      size -= std::min(size, cs.kills(rng));
      if (size == 0) return {OutcomeKind::Extinct, gen};
    }
    return {OutcomeKind::CapSurvive, cfg.generation_cap};
  }

  // Branching process on colony counts: every live colony runs one
  // grow/catastrophe/disperse cycle per generation.
  std::uint64_t alive = 1;
  for (std::uint64_t gen = 1; gen <= cfg.generation_cap; ++gen) {
    std::uint64_t next = 0;
    for (std::uint64_t k = 0; k < alive; ++k) {
      next += static_cast<std::uint64_t>(cs.offspring(rng));
      if (next >= cfg.colony_cap) return {OutcomeKind::CapSurvive, gen};
    }
    if (next == 0) return {OutcomeKind::Extinct, gen};
    alive = next;
  }
  return {OutcomeKind::CapSurvive, cfg.generation_cap};
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return std::min(requested, 256u);
  if (const char* env = std::getenv("CATLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 256)
      return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? std::min(hw, 256u) : 1u;
}

}  // namespace detail

inline SimOutcome simulate_extinction(const DispersionScheme& scheme,
                                      const ModelParams& mp,
                                      const SimConfig& cfg,
                                      std::uint64_t replication_index) {
  validate_sim_config(cfg);
  if (cfg.mode != SimMode::EmbeddedChain)
    throw std::invalid_argument(
        "extinction runs use the embedded chain; continuous time is for "
        "timelines");
  const ColonySampler cs(scheme, mp);
  return detail::run_replication(cs, cfg, replication_index);
}

// Extinction probability estimate over cfg.replications independent runs.
// Replication r always uses the stream derived from (seed, r), so the tally
// is bit-for-bit identical for any thread count.
inline SimEstimate estimate_psi(const DispersionScheme& scheme,
                                const ModelParams& mp, const SimConfig& cfg,
                                unsigned threads = 0) {
  validate_sim_config(cfg);
  if (cfg.mode != SimMode::EmbeddedChain)
    throw std::invalid_argument(
        "extinction runs use the embedded chain; continuous time is for "
        "timelines");
  const ColonySampler cs(scheme, mp);
  const std::uint64_t reps = cfg.replications;
  const unsigned nthreads = std::min<std::uint64_t>(
      detail::resolve_threads(threads), reps);

  std::uint64_t extinct = 0;
  if (nthreads <= 1) {
    for (std::uint64_t r = 0; r < reps; ++r)
      if (detail::run_replication(cs, cfg, r).kind == OutcomeKind::Extinct)
        ++extinct;
  } else {
    std::vector<std::uint64_t> partial(nthreads, 0);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
      const std::uint64_t lo = reps * t / nthreads;
      const std::uint64_t hi = reps * (t + 1) / nthreads;
      pool.emplace_back([&, t, lo, hi] {
        std::uint64_t count = 0;
        for (std::uint64_t r = lo; r < hi; ++r)
          if (detail::run_replication(cs, cfg, r).kind == OutcomeKind::Extinct)
            ++count;
        partial[t] = count;
      });
    }
    for (auto& th : pool) th.join();
    for (std::uint64_t c : partial) extinct += c;
  }

  SimEstimate est;
  est.replications = reps;
  est.extinct = extinct;
  est.cap_survive = reps - extinct;
  est.cap_bias_note = est.cap_survive > 0;
  est.psi_hat = static_cast<double>(extinct) / static_cast<double>(reps);
  est.std_error =
      std::sqrt(est.psi_hat * (1.0 - est.psi_hat) / static_cast<double>(reps));
  return est;
}

// ---------------------------------------------------------------------------
// Continuous-time single-colony timeline
// ---------------------------------------------------------------------------

enum class EventKind { Birth, Catastrophe };

struct TimelineEvent {
  double time = 0.0;
  EventKind kind = EventKind::Birth;
  long long size_before = 0;
  long long size_after = 0;
};

struct Timeline {
  std::vector<TimelineEvent> events;
  double horizon = 0.0;
  std::optional<double> extinction_time;
};

// One colony, births at rate lambda and catastrophes at rate 1, run until
// extinction or the horizon. Event times are strictly increasing.
inline Timeline simulate_timeline(const ModelParams& mp, double horizon,
                                  Xoshiro256pp& rng) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be positive and finite");
  Timeline tl;
  tl.horizon = horizon;
  const double total_rate = mp.lambda + 1.0;
  const double birth_share = mp.lambda / total_rate;
  double t = 0.0;
  long long size = 1;
  for (;;) {
    t += -std::log(rng.uniform01_positive()) / total_rate;
    if (t > horizon) break;
    TimelineEvent ev;
    ev.time = t;
    ev.size_before = size;
    if (rng.uniform01() < birth_share) {
      ev.kind = EventKind::Birth;
      ++size;
    } else {
      ev.kind = EventKind::Catastrophe;
      size = sample_survivors_given_size(size, mp, rng);
    }
    ev.size_after = size;
    tl.events.push_back(ev);
    if (size == 0) {
      tl.extinction_time = t;
      break;
    }
  }
  return tl;
}

}  // namespace catlab
