#pragma once

// Replicated runs with large-outbreak classification. Replica i always uses
// derive_seed(root, i), so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "evosim/config.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/engine_dynamic.hpp"
#include "evosim/engine_static.hpp"
#include "evosim/graph.hpp"
#include "evosim/rng.hpp"

namespace evosim {

struct OutbreakEstimate {
  std::size_t trials = 0;
  std::size_t n_large = 0;
  std::size_t budget_exceeded = 0;
  double p_large = 0;
  double p_large_se = 0;
  std::optional<double> cond_size;     // mean I_inf / n over large runs
  std::optional<double> cond_size_se;  // absent with fewer than two large runs
  std::vector<double> fractions;       // I_inf / n per replica, in replica order
};

/// Summaries of per-replica final-size fractions.
inline OutbreakEstimate summarize_outbreaks(const std::vector<double>& fractions, double eta,
                                            std::size_t budget_exceeded = 0) {
  OutbreakEstimate est;
  est.trials = fractions.size();
  est.fractions = fractions;
  est.budget_exceeded = budget_exceeded;
  if (fractions.empty()) return est;
  double sum = 0.0, sum_sq = 0.0;
  for (double f : fractions) {
    if (f > eta) {
      ++est.n_large;
      sum += f;
      sum_sq += f * f;
    }
  }
  const double trials = static_cast<double>(est.trials);
  est.p_large = static_cast<double>(est.n_large) / trials;
  est.p_large_se = std::sqrt(est.p_large * (1.0 - est.p_large) / trials);
  if (est.n_large > 0) {
    const double k = static_cast<double>(est.n_large);
    const double mean = sum / k;
    est.cond_size = mean;
    if (est.n_large > 1) {
      const double var = std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0));
      est.cond_size_se = std::sqrt(var / k);
    }
  }
  return est;
}

/// Runs `replica(seed)` for seeds derive_seed(root, 0..trials-1) across `workers` threads
/// and returns the results in replica order.
template <class Replica>
auto run_replicas(Replica&& replica, std::size_t trials, std::uint64_t root_seed, std::size_t workers)
    -> std::vector<decltype(replica(std::uint64_t{}))> {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  std::vector<decltype(replica(std::uint64_t{}))> results(trials);
  workers = std::clamp<std::size_t>(workers, 1, trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        results[i] = replica(derive_seed(root_seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = trials;
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct ReplicaOutcome {
  double fraction = 0;
  bool over_budget = false;
};

inline OutbreakEstimate summarize_replicas(const std::vector<ReplicaOutcome>& runs, double eta) {
  std::vector<double> fractions;
  fractions.reserve(runs.size());
  std::size_t exceeded = 0;
  for (const auto& r : runs) {
    fractions.push_back(r.fraction);
    exceeded += r.over_budget ? 1 : 0;
  }
  return summarize_outbreaks(fractions, eta, exceeded);
}

using GraphFactory = std::function<HalfEdgeGraph(std::uint64_t seed)>;

/// Fresh graph per replica from `make_graph`, then a Markov-mode static run.
inline OutbreakEstimate estimate_outbreak(const GraphFactory& make_graph, const EpidemicConfig& cfg,
                                          std::size_t trials, double eta, std::uint64_t root_seed,
                                          std::size_t workers = 1) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  cfg.validate();
  const auto runs = run_replicas(
      [&](std::uint64_t seed) {
        const HalfEdgeGraph g = make_graph(derive_seed(seed, 0));
        const Trajectory t = run_static(g, cfg, derive_seed(seed, 1));
        return ReplicaOutcome{static_cast<double>(t.final_size) / static_cast<double>(g.n()),
                              t.outcome == Outcome::BudgetExceeded};
      },
      trials, root_seed, workers);
  return summarize_replicas(runs, eta);
}

/// Configuration-model graphs CM(n, dist) per replica.
inline OutbreakEstimate estimate_outbreak(const DegreeDistribution& dist, std::size_t n, const EpidemicConfig& cfg,
                                          std::size_t trials, double eta, std::uint64_t root_seed,
                                          std::size_t workers = 1) {
  return estimate_outbreak([&](std::uint64_t s) { return gen_config_model(n, dist, s); }, cfg, trials, eta,
                           root_seed, workers);
}

/// Dynamic-construction replicas (avoSI / abAvoSI).
inline OutbreakEstimate estimate_outbreak_dynamic(const DegreeDistribution& dist, std::size_t n,
                                                  const EpidemicConfig& cfg, std::size_t trials, double eta,
                                                  std::uint64_t root_seed, std::size_t workers = 1) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  cfg.validate();
  const auto runs = run_replicas(
      [&](std::uint64_t seed) {
        const Trajectory t = run_dynamic(dist, n, cfg, seed);
        return ReplicaOutcome{static_cast<double>(t.final_size) / static_cast<double>(n),
                              t.outcome == Outcome::BudgetExceeded};
      },
      trials, root_seed, workers);
  return summarize_replicas(runs, eta);
}

}  // namespace evosim
