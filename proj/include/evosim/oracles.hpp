#pragma once

// Reference computations used to cross-check the engines and the analytic solvers.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "evosim/analytics.hpp"
#include "evosim/coupling.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/graph.hpp"
#include "evosim/rng.hpp"

namespace evosim {

/// Component of `seed` in the subgraph of retained edges, by explicit exploration:
/// active vertices A are expanded one at a time, unexplored ones U are discovered,
/// explored ones move to R.
inline std::vector<std::uint32_t> percolate_component(const HalfEdgeGraph& g, const std::vector<bool>& retained,
                                                      std::uint32_t seed) {
  if (seed >= g.n()) throw std::invalid_argument("seed vertex out of range");
  if (retained.size() != g.num_edges()) throw std::invalid_argument("retain mask must cover every edge");
  enum : std::uint8_t { Unexplored, Active, Removed };
  std::vector<std::uint8_t> status(g.n(), Unexplored);
  std::vector<std::uint32_t> active{seed};
  std::vector<std::uint32_t> removed;
  status[seed] = Active;
  while (!active.empty()) {
    const std::uint32_t v = active.back();
    active.pop_back();
    for (std::uint32_t h : g.half_edges(v)) {
      if (!g.is_paired(h) || !retained[HalfEdgeGraph::edge_of(h)]) continue;
      const std::uint32_t u = g.owner(h ^ 1u);
      if (status[u] == Unexplored) {
        status[u] = Active;
        active.push_back(u);
      }
    }
    status[v] = Removed;
    removed.push_back(v);
  }
  std::sort(removed.begin(), removed.end());
  return removed;
}

/// Same component computed with a union-find over retained edges.
inline std::vector<std::uint32_t> percolate_component_union_find(const HalfEdgeGraph& g,
                                                                 const std::vector<bool>& retained,
                                                                 std::uint32_t seed) {
  if (seed >= g.n()) throw std::invalid_argument("seed vertex out of range");
  if (retained.size() != g.num_edges()) throw std::invalid_argument("retain mask must cover every edge");
  std::vector<std::uint32_t> parent(g.n());
  std::iota(parent.begin(), parent.end(), 0u);
  const auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
    if (!retained[e]) continue;
    const auto [a, b] = g.endpoints(e);
    const std::uint32_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  const std::uint32_t root = find(seed);
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < g.n(); ++v)
    if (find(v) == root) out.push_back(v);
  return out;
}

/// Retains each edge independently with probability p.
inline std::vector<bool> bernoulli_retain(const HalfEdgeGraph& g, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("retain probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<bool> keep(g.num_edges());
  for (std::size_t e = 0; e < keep.size(); ++e) keep[e] = rng.uniform() < p;
  return keep;
}

inline std::vector<std::uint32_t> percolate_component(const HalfEdgeGraph& g, double p, std::uint32_t seed,
                                                      std::uint64_t rng_seed) {
  return percolate_component(g, bernoulli_retain(g, p, rng_seed), seed);
}

/// Edges whose first infection clock beats the first deletion clock.
inline std::vector<bool> retained_from_bundle(const HalfEdgeGraph& g, const CouplingBundle& bundle) {
  std::vector<bool> keep(g.num_edges());
  for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
    const EdgeClocks c = bundle.clocks(e, 1);
    keep[e] = c.T < c.R;
  }
  return keep;
}

/// Exact law of the seed's component size under bond percolation with retention p,
/// by enumerating all 2^|E| retained subsets (|E| <= 24).
inline std::map<std::size_t, double> exact_delsi_distribution(const HalfEdgeGraph& g, double p, std::uint32_t seed) {
  constexpr std::size_t kMaxEdges = 24;
  const std::size_t m = g.num_edges();
  if (m > kMaxEdges) throw std::invalid_argument("exact enumeration limited to 24 edges");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (seed >= g.n()) throw std::invalid_argument("seed vertex out of range");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ends(m);
  for (std::uint32_t e = 0; e < m; ++e) ends[e] = g.endpoints(e);
  std::map<std::size_t, CompensatedSum> acc;
  std::vector<std::uint32_t> parent(g.n());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const int kept = std::popcount(mask);
    const double weight = std::pow(p, kept) * std::pow(1.0 - p, static_cast<double>(m) - kept);
    if (weight == 0.0) continue;
    std::iota(parent.begin(), parent.end(), 0u);
    const auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t e = 0; e < m; ++e) {
      if (!((mask >> e) & 1u)) continue;
      const std::uint32_t ra = find(ends[e].first), rb = find(ends[e].second);
      if (ra != rb) parent[ra] = rb;
    }
    const std::uint32_t root = find(seed);
    std::size_t size = 0;
    for (std::uint32_t v = 0; v < g.n(); ++v) size += find(v) == root ? 1 : 0;
    acc[size].add(weight);
  }
  std::map<std::size_t, double> out;
  for (auto& [size, sum] : acc) out[size] = sum.value();
  return out;
}

namespace detail {

/// Sampler for D* - 1 where P(D* = j) = j p_j / m1.
class SizeBiasedSampler {
 public:
  explicit SizeBiasedSampler(const DegreeDistribution& dist) {
    const auto pmf = dist.pmf();
    const double m1 = moment(dist, 1);
    double run = 0.0;
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      run += static_cast<double>(j) * pmf[j] / m1;
      cdf_.push_back(run);
    }
  }
  std::uint32_t draw_minus_one(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto j = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    return static_cast<std::uint32_t>(std::min(j, cdf_.size() - 1) - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace detail

enum class WalkMode { Graph, Percolated };

/// Exploration random walk: W_0 from D (or Binomial(D, tau)), then increments
/// (D* - 1) - 1 (or Binomial(D* - 1, tau) - 1), frozen once it hits 0. The returned
/// path holds W_0..W_steps.
inline std::vector<std::int64_t> exploration_walk(const DegreeDistribution& dist, WalkMode mode, double tau,
                                                  std::size_t steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("walk needs at least one step");
  if (mode == WalkMode::Graph) tau = 1.0;
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  Rng rng(seed);
  const detail::SizeBiasedSampler later(dist);
  std::vector<std::int64_t> path;
  path.reserve(steps + 1);
  std::int64_t w = static_cast<std::int64_t>(rng.binomial(dist.sample(rng), tau));
  path.push_back(w);
  for (std::size_t t = 1; t <= steps; ++t) {
    if (w > 0) w += static_cast<std::int64_t>(rng.binomial(later.draw_minus_one(rng), tau)) - 1;
    path.push_back(w);
  }
  return path;
}

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  std::size_t trials = 0;
};

/// Two-phase branching process: generation 1 ~ Binomial(D, tau), later offspring
/// Binomial(D* - 1, tau), tau = lambda/(lambda+rho). Survival means alive after
/// `max_generations` generations or a population above `population_cap`.
inline McEstimate bp_survival_mc(const DegreeDistribution& dist, double lambda, double rho, std::size_t trials,
                                 std::uint64_t seed, std::size_t max_generations = 200,
                                 std::uint64_t population_cap = 10'000) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(lambda >= 0.0) || !(rho >= 0.0) || lambda + rho == 0.0)
    throw std::invalid_argument("rates must be nonnegative with lambda + rho > 0");
  const double tau = lambda / (lambda + rho);
  Rng rng(seed);
  const detail::SizeBiasedSampler later(dist);
  std::size_t survived = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::uint64_t pop = rng.binomial(dist.sample(rng), tau);
    std::size_t gen = 1;
    while (pop > 0 && pop <= population_cap && gen < max_generations) {
      std::uint64_t next = 0;
      for (std::uint64_t i = 0; i < pop; ++i) next += rng.binomial(later.draw_minus_one(rng), tau);
      pop = next;
      ++gen;
    }
    survived += pop > 0 ? 1 : 0;
  }
  McEstimate out;
  out.trials = trials;
  out.estimate = static_cast<double>(survived) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  return out;
}

}  // namespace evosim
