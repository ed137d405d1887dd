#pragma once

// Reveal-as-you-go construction: vertices start with free half-edges only. Infected
// free half-edges pair with a uniform other free half-edge (rate lambda each) or jump
// to a uniform vertex (rate rho each). With the time change the jump chain is the
// same but pairings run at total rate X-1 and rewirings at (rho/lambda)(X-1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "evosim/config.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/graph.hpp"
#include "evosim/indexed_set.hpp"
#include "evosim/rng.hpp"

namespace evosim {

namespace detail {

class DynamicRun {
 public:
  DynamicRun(const std::vector<std::uint32_t>& degrees, const EpidemicConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.variant != Variant::AvoSI && cfg_.variant != Variant::ABAvoSI)
      throw ConfigError("dynamic construction supports avoSI and abAvoSI only");
    if (cfg_.time_changed && !(cfg_.lambda > 0.0)) throw ConfigError("time change needs lambda > 0");
    if (degrees.empty()) throw ConfigError("dynamic run needs at least one vertex");
    n_ = degrees.size();
    std::size_t total = 0;
    for (auto d : degrees) total += d;
    owner_.resize(total);
    slot_.resize(total);
    at_.assign(n_, {});
    std::uint32_t h = 0;
    for (std::uint32_t v = 0; v < n_; ++v) {
      at_[v].reserve(degrees[v]);
      for (std::uint32_t i = 0; i < degrees[v]; ++i, ++h) {
        owner_[h] = v;
        slot_[h] = i;
        at_[v].push_back(h);
      }
    }
    free_.reset(total);
    for (std::uint32_t i = 0; i < total; ++i) free_.insert(i);
    inf_.reset(total);
    infected_.assign(n_, 0);
    ab_ = cfg_.variant == Variant::ABAvoSI;
    if (ab_) {
      A_.assign(total, std::numeric_limits<double>::quiet_NaN());
      B_.assign(total, -std::numeric_limits<double>::infinity());
    }
    for (std::uint32_t v = 0; v < n_; ++v) {
      if (degrees[v] >= sk_.size()) sk_.resize(degrees[v] + 1, 0);
      ++sk_[degrees[v]];
    }
    S_ = n_;
    budget_ = cfg_.event_budget ? cfg_.event_budget : 50ULL * (n_ + total);
  }

  Trajectory run(std::uint64_t seed) {
    Rng rng(seed);
    std::uint32_t seed_vertex = 0;
    if (cfg_.seed_vertex) {
      if (*cfg_.seed_vertex >= n_) throw ConfigError("seed vertex out of range");
      seed_vertex = *cfg_.seed_vertex;
    } else {
      seed_vertex = static_cast<std::uint32_t>(rng.index(n_));
    }
    Recorder rec(cfg_.record);
    const auto snap = [this] { return snapshot(); };
    rec.start(snap);
    infect(seed_vertex, 0.0);

    const double lam = cfg_.lambda, rho = cfg_.rho;
    double t = 0.0;
    Outcome outcome = Outcome::Absorbed;
    EventCounts& ev = events_;
    std::uint64_t seen = 0;
    while (!inf_.empty() && free_.size() > 1) {
      const double x_i = static_cast<double>(inf_.size());
      const double x_m1 = static_cast<double>(free_.size() - 1);
      const double pair_rate = cfg_.time_changed ? x_m1 : lam * x_i;
      const double rewire_rate = cfg_.time_changed ? (rho / lam) * x_m1 : rho * x_i;
      const double total = pair_rate + rewire_rate;
      if (!(total > 0.0)) break;
      if (++seen > budget_) {
        outcome = Outcome::BudgetExceeded;
        break;
      }
      t += rng.exponential(total);
      rec.before(t, snap);
      const std::uint32_t h1 = inf_.sample(rng);
      if (rng.uniform() * total < pair_rate) {
        std::uint32_t h2 = h1;
        while (h2 == h1) h2 = free_.sample(rng);
        const std::uint32_t y = owner_[h2];
        const bool susceptible_target = !infected_[y];
        const bool transmits = susceptible_target && (!ab_ || B_[h2] < A_[h1]);
        remove_free(h1);
        remove_free(h2);
        if (transmits) {
          ++ev.infection;
          infect(y, t);
        } else if (susceptible_target) {
          ++ev.blocked;
        } else {
          ++ev.stabilized;
        }
      } else {
        const auto target = static_cast<std::uint32_t>(rng.index(n_));
        move(h1, target, t);
        ++ev.rewiring;
      }
      rec.after(t, snap);
    }

    Trajectory out;
    out.outcome = outcome;
    out.final_size = I_;
    out.seed_vertex = seed_vertex;
    out.end_time = t;
    out.events = events_;
    out.samples = rec.finish(t, snap);
    for (std::uint32_t v = 0; v < n_; ++v)
      if (infected_[v]) out.infected.push_back(v);
    return out;
  }

 private:
  Sample snapshot() const {
    Sample s;
    s.S = S_;
    s.I = I_;
    s.R = 0;
    s.X = free_.size();
    s.X_I = inf_.size();
    s.X_S = free_.size() - inf_.size();
    const std::size_t kmax = cfg_.record.k_max;
    s.S_k.assign(kmax + 1, 0);
    for (std::size_t k = 0; k <= kmax && k < sk_.size(); ++k) s.S_k[k] = sk_[k];
    return s;
  }

  void shift_susceptible(std::size_t from_k, std::size_t to_k) {
    if (to_k >= sk_.size()) sk_.resize(to_k + 1, 0);
    --sk_[from_k];
    ++sk_[to_k];
  }

  void detach(std::uint32_t h) {
    auto& list = at_[owner_[h]];
    const std::uint32_t pos = slot_[h];
    const std::uint32_t last = list.back();
    list[pos] = last;
    slot_[last] = pos;
    list.pop_back();
  }

  void attach(std::uint32_t h, std::uint32_t v) {
    owner_[h] = v;
    slot_[h] = static_cast<std::uint32_t>(at_[v].size());
    at_[v].push_back(h);
  }

  void remove_free(std::uint32_t h) {
    const std::uint32_t v = owner_[h];
    const std::size_t before = at_[v].size();
    detach(h);
    free_.erase(h);
    inf_.erase(h);
    if (!infected_[v]) shift_susceptible(before, before - 1);
  }

  void move(std::uint32_t h, std::uint32_t target, double t) {
    const std::uint32_t from = owner_[h];
    if (ab_) B_[h] = t;
    if (from == target) return;
    const std::size_t target_before = at_[target].size();
    detach(h);
    attach(h, target);
    if (!infected_[target]) {
      inf_.erase(h);
      shift_susceptible(target_before, target_before + 1);
    } else if (ab_ && std::isnan(A_[h])) {
      A_[h] = t;
    }
  }

  void infect(std::uint32_t v, double t) {
    infected_[v] = 1;
    --S_;
    ++I_;
    --sk_[at_[v].size()];
    for (std::uint32_t h : at_[v]) {
      inf_.insert(h);
      if (ab_ && std::isnan(A_[h])) A_[h] = t;
    }
  }

  EpidemicConfig cfg_;
  std::size_t n_ = 0;
  bool ab_ = false;
  std::vector<std::uint32_t> owner_, slot_;
  std::vector<std::vector<std::uint32_t>> at_;
  IndexedSet free_, inf_;
  std::vector<std::uint8_t> infected_;
  std::vector<double> A_, B_;
  std::vector<std::uint64_t> sk_;
  std::uint64_t S_ = 0, I_ = 0;
  EventCounts events_;
  std::uint64_t budget_ = 0;
};

}  // namespace detail

/// Dynamic construction on the given degree sequence.
inline Trajectory run_dynamic(const std::vector<std::uint32_t>& degrees, const EpidemicConfig& cfg,
                              std::uint64_t seed) {
  detail::DynamicRun run(degrees, cfg);
  return run.run(seed);
}

/// Dynamic construction with n i.i.d. degrees from `dist` (even-sum rule as in the configuration model).
inline Trajectory run_dynamic(const DegreeDistribution& dist, std::size_t n, const EpidemicConfig& cfg,
                              std::uint64_t seed) {
  Rng degree_rng(derive_seed(seed, 0xD1CEull));
  const auto degrees = sample_degrees(n, dist, degree_rng);
  return run_dynamic(degrees, cfg, derive_seed(seed, 1));
}

}  // namespace evosim
