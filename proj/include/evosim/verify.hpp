#pragma once

// Statistical verification suites shared by the command-line `verify` command and
// the test programs. Each suite returns named checks with the measured statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evosim/analytics.hpp"
#include "evosim/config.hpp"
#include "evosim/coupled_suite.hpp"
#include "evosim/coupling.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/engine_dynamic.hpp"
#include "evosim/engine_static.hpp"
#include "evosim/graph.hpp"
#include "evosim/oracles.hpp"
#include "evosim/rng.hpp"

namespace evosim {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ---- coupling ----

struct CouplingStats {
  std::size_t runs = 0;
  std::size_t del_in_evo = 0, evo_in_avo = 0, del_in_ab = 0, ab_in_evo = 0;
  std::size_t del_is_percolation = 0;
  std::size_t chains = 0;  // runs where all four inclusions hold
};

struct CouplingSweep {
  std::string dist = "poisson:5";
  std::size_t n = 1000;
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  double lambda_lo = 0.1, lambda_hi = 3.0;
  double rho_lo = 0.0, rho_hi = 5.0;
};

/// Coupled SI runs on fresh CM graphs with (lambda, rho) drawn uniformly from the sweep box.
/// Run i draws its rates from derive_seed(seed, 3i), its graph from derive_seed(seed, 3i+1)
/// and its bundle from derive_seed(seed, 3i+2).
inline CouplingStats coupling_stats(const CouplingSweep& sweep) {
  const DegreeDistribution dist = DegreeDistribution::parse(sweep.dist);
  CouplingStats st;
  for (std::size_t i = 0; i < sweep.runs; ++i) {
    Rng rates(derive_seed(sweep.seed, 3 * i));
    EpidemicConfig cfg;
    cfg.lambda = sweep.lambda_lo + (sweep.lambda_hi - sweep.lambda_lo) * rates.uniform();
    cfg.rho = sweep.rho_lo + (sweep.rho_hi - sweep.rho_lo) * rates.uniform();
    const HalfEdgeGraph g = gen_config_model(sweep.n, dist, derive_seed(sweep.seed, 3 * i + 1));
    const CouplingBundle bundle(derive_seed(sweep.seed, 3 * i + 2), cfg.lambda, cfg.rho, sweep.n);
    const CoupledSets sets = run_coupled_suite(g, cfg, bundle);
    const InclusionReport rep = check_inclusions(sets);
    ++st.runs;
    st.del_in_evo += rep.del_in_evo;
    st.evo_in_avo += rep.evo_in_avo;
    st.del_in_ab += rep.del_in_ab;
    st.ab_in_evo += rep.ab_in_evo;
    st.chains += rep.all();
    st.del_is_percolation += percolate_component(g, retained_from_bundle(g, bundle), sets.del_run.seed_vertex) == sets.del;
  }
  return st;
}

inline std::vector<Check> coupling_checks(const CouplingStats& st) {
  const auto frac = [&](std::size_t k) { return std::to_string(k) + "/" + std::to_string(st.runs); };
  return {
      {"delSI within evoSI", st.del_in_evo == st.runs, frac(st.del_in_evo)},
      {"evoSI within avoSI", st.evo_in_avo == st.runs, frac(st.evo_in_avo)},
      {"delSI within abAvoSI", st.del_in_ab == st.runs, frac(st.del_in_ab)},
      {"abAvoSI within evoSI", st.ab_in_evo == st.runs, frac(st.ab_in_evo)},
      {"delSI equals percolation cluster", st.del_is_percolation == st.runs, frac(st.del_is_percolation)},
  };
}

// ---- percolation ----

struct BucketComparison {
  std::size_t size = 0;
  double exact = 0, empirical = 0, sigma = 0;
  bool within(double k) const { return std::abs(empirical - exact) <= k * sigma + 1e-12; }
};

/// Empirical law of the delSI final size (Markov engine) against exhaustive enumeration
/// of bond percolation with p = lambda/(lambda+rho).
inline std::vector<BucketComparison> compare_delsi_with_enumeration(const HalfEdgeGraph& g, double lambda,
                                                                    double rho, std::uint32_t seed_vertex,
                                                                    std::size_t trials, std::uint64_t seed) {
  const double p = lambda / (lambda + rho);
  const auto exact = exact_delsi_distribution(g, p, seed_vertex);
  EpidemicConfig cfg;
  cfg.variant = Variant::DelSI;
  cfg.lambda = lambda;
  cfg.rho = rho;
  cfg.seed_vertex = seed_vertex;
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t t = 0; t < trials; ++t) ++counts[run_static(g, cfg, derive_seed(seed, t)).final_size];
  std::vector<BucketComparison> out;
  for (std::size_t size = 1; size <= g.n(); ++size) {
    BucketComparison b;
    b.size = size;
    b.exact = exact.count(size) ? exact.at(size) : 0.0;
    b.empirical = counts.count(size) ? static_cast<double>(counts.at(size)) / static_cast<double>(trials) : 0.0;
    b.sigma = std::sqrt(b.exact * (1.0 - b.exact) / static_cast<double>(trials));
    out.push_back(b);
  }
  return out;
}

/// Random multigraph on 3..7 vertices with 1..max_edges uniformly placed edges
/// (self-loops and parallel edges allowed).
inline HalfEdgeGraph random_small_graph(std::uint64_t seed, std::size_t max_edges = 10) {
  Rng rng(seed);
  const std::size_t n = 3 + rng.index(5);
  const std::size_t m = 1 + rng.index(max_edges);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(m);
  for (auto& e : edges) e = {static_cast<std::uint32_t>(rng.index(n)), static_cast<std::uint32_t>(rng.index(n))};
  return HalfEdgeGraph(n, edges);
}

inline std::vector<Check> percolation_checks(std::size_t trials, std::uint64_t seed) {
  std::vector<Check> out;
  const HalfEdgeGraph triangle(3, {{0, 1}, {1, 2}, {2, 0}});
  const auto report = [&](const std::string& name, const std::vector<BucketComparison>& buckets) {
    std::ostringstream os;
    os.precision(4);
    bool ok = true;
    for (const auto& b : buckets) {
      ok = ok && b.within(3.0);
      os << b.size << ":" << b.empirical << "/" << b.exact << " ";
    }
    out.push_back({name, ok, os.str()});
  };
  report("triangle, lambda=1 rho=1", compare_delsi_with_enumeration(triangle, 1.0, 1.0, 0, trials, seed));
  report("triangle, lambda=2 rho=0.5",
         compare_delsi_with_enumeration(triangle, 2.0, 0.5, 0, trials, derive_seed(seed, 1)));
  const HalfEdgeGraph g = random_small_graph(derive_seed(seed, 2));
  report("random multigraph, lambda=1 rho=0.7",
         compare_delsi_with_enumeration(g, 1.0, 0.7, 0, trials, derive_seed(seed, 3)));

  // Exploration and union-find must agree on every retained set.
  const HalfEdgeGraph big = gen_config_model(2000, DegreeDistribution::poisson(3.0), derive_seed(seed, 4));
  std::size_t agree = 0;
  constexpr std::size_t kMasks = 50;
  for (std::size_t i = 0; i < kMasks; ++i) {
    const auto keep = bernoulli_retain(big, 0.4, derive_seed(seed, 100 + i));
    const auto v = static_cast<std::uint32_t>(i % big.n());
    agree += percolate_component(big, keep, v) == percolate_component_union_find(big, keep, v);
  }
  out.push_back({"exploration matches union-find", agree == kMasks,
                 std::to_string(agree) + "/" + std::to_string(kMasks)});
  return out;
}

// ---- limits ----

struct LimitStudy {
  std::string dist = "poisson:5";
  std::size_t n = 100'000;
  double lambda = 1.0;
  double alpha_fraction = 0.5;  // alpha = alpha_fraction * alpha_c
  std::size_t surviving_runs = 20;
  std::size_t max_attempts = 200;
  double t_max = 1.0;
  double grid_dt = 0.01;
  double eta = 0.01;
  std::uint64_t seed = 1;
};

struct LimitStats {
  double alpha = 0, rho = 0;
  std::size_t attempts = 0, surviving = 0;
  double sup_x = 0, sup_s = 0, sup_xs = 0;  // worst deviation over runs and grid times
  std::vector<double> final_fractions;      // surviving runs
  double mean_final = 0;
};

/// Time-changed dynamic avoSI runs compared with the deterministic limits of X/n,
/// S/n and X_S/n at grid times up to min(absorption time, t_max).
inline LimitStats limit_stats(const LimitStudy& study) {
  const DegreeDistribution dist = DegreeDistribution::parse(study.dist);
  LimitStats st;
  const double m1 = moment(dist, 1);
  st.alpha = study.alpha_fraction * (moment(dist, 2) - 2.0 * m1);
  st.rho = st.alpha * study.lambda / m1;
  EpidemicConfig cfg;
  cfg.variant = Variant::AvoSI;
  cfg.lambda = study.lambda;
  cfg.rho = st.rho;
  cfg.time_changed = true;
  cfg.record.mode = RecordPolicy::Mode::Grid;
  cfg.record.grid_dt = study.grid_dt;
  cfg.record.horizon = study.t_max;
  const double n = static_cast<double>(study.n);
  while (st.surviving < study.surviving_runs && st.attempts < study.max_attempts) {
    const Trajectory tr = run_dynamic(dist, study.n, cfg, derive_seed(study.seed, st.attempts++));
    const double fraction = static_cast<double>(tr.final_size) / n;
    if (!(fraction > study.eta)) continue;
    ++st.surviving;
    st.final_fractions.push_back(fraction);
    const double t_stop = std::min(tr.end_time, study.t_max);
    for (const Sample& s : tr.samples) {
      if (s.t > t_stop) break;
      const LimitPoint lp = limit_curves(dist, st.alpha, s.t, 0);
      st.sup_x = std::max(st.sup_x, std::abs(static_cast<double>(s.X) / n - lp.x));
      st.sup_s = std::max(st.sup_s, std::abs(static_cast<double>(s.S) / n - lp.s));
      st.sup_xs = std::max(st.sup_xs, std::abs(static_cast<double>(s.X_S) / n - lp.x_s));
    }
  }
  double sum = 0.0;
  for (double f : st.final_fractions) sum += f;
  if (!st.final_fractions.empty()) st.mean_final = sum / static_cast<double>(st.final_fractions.size());
  return st;
}

inline std::vector<Check> limit_checks(const LimitStats& st, std::size_t wanted, double tolerance) {
  std::ostringstream sup;
  sup << "X " << st.sup_x << ", S " << st.sup_s << ", X_S " << st.sup_xs;
  return {
      {"enough surviving runs", st.surviving >= wanted,
       std::to_string(st.surviving) + " of " + std::to_string(st.attempts)},
      {"sup deviation below " + std::to_string(tolerance),
       st.surviving > 0 && std::max({st.sup_x, st.sup_s, st.sup_xs}) < tolerance, sup.str()},
  };
}

// ---- survival ----

struct SurvivalPoint {
  std::string dist;
  double lambda = 1, rho = 0;
};

inline std::vector<Check> survival_checks(const std::vector<SurvivalPoint>& points, std::size_t trials,
                                          std::uint64_t seed) {
  std::vector<Check> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    const DegreeDistribution d = DegreeDistribution::parse(pt.dist);
    const double exact = bp_survival(d, pt.lambda, pt.rho);
    const McEstimate mc = bp_survival_mc(d, pt.lambda, pt.rho, trials, derive_seed(seed, i));
    std::ostringstream name, detail;
    name << pt.dist << " lambda=" << pt.lambda << " rho=" << pt.rho;
    detail << "analytic " << exact << ", mc " << mc.estimate << " +- " << mc.std_error;
    const double slack = 3.0 * std::max(mc.std_error, 1.0 / static_cast<double>(trials));
    out.push_back({name.str(), std::abs(exact - mc.estimate) <= slack, detail.str()});
  }
  return out;
}

inline std::vector<SurvivalPoint> default_survival_points() {
  return {{"poisson:5", 1.2, 4.0},     {"poisson:5", 1.5, 4.0},   {"poisson:5", 2.0, 4.0},
          {"poisson:3", 1.0, 1.0},     {"poisson:2", 1.0, 0.2},   {"geometric:0.3", 1.0, 1.0},
          {"geometric:0.5", 2.0, 0.5}, {"regular:3", 1.0, 0.5},  {"regular:5", 1.0, 1.5},
          {"poisson:1.4", 1.0, 0.05}};
}

}  // namespace evosim
