#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "evosim/config.hpp"
#include "evosim/coupling.hpp"
#include "evosim/engine_static.hpp"
#include "evosim/graph.hpp"

namespace evosim {

struct CoupledSets {
  std::vector<std::uint32_t> del, ab, evo, avo;  // sorted vertex ids
  Trajectory del_run, ab_run, evo_run, avo_run;
};

/// True if sorted `small` is a subset of sorted `big`.
inline bool is_subset(const std::vector<std::uint32_t>& small, const std::vector<std::uint32_t>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

/// Runs delSI, AB-avoSI, evoSI and avoSI on the same graph, all reading one bundle.
inline CoupledSets run_coupled_suite(const HalfEdgeGraph& graph, const EpidemicConfig& base,
                                     const CouplingBundle& bundle) {
  if (base.gamma != 0.0 || !is_si(base.variant))
    throw ConfigError("coupled suite covers the SI variants only (gamma must be 0)");
  CoupledSets out;
  const auto run_as = [&](Variant v) {
    EpidemicConfig cfg = base;
    cfg.variant = v;
    return run_static(graph, cfg, bundle);
  };
  out.del_run = run_as(Variant::DelSI);
  out.ab_run = run_as(Variant::ABAvoSI);
  out.evo_run = run_as(Variant::EvoSI);
  out.avo_run = run_as(Variant::AvoSI);
  out.del = out.del_run.infected;
  out.ab = out.ab_run.infected;
  out.evo = out.evo_run.infected;
  out.avo = out.avo_run.infected;
  return out;
}

struct InclusionReport {
  bool del_in_evo = false, evo_in_avo = false, del_in_ab = false, ab_in_evo = false;
  bool all() const { return del_in_evo && evo_in_avo && del_in_ab && ab_in_evo; }
};

inline InclusionReport check_inclusions(const CoupledSets& s) {
  InclusionReport r;
  r.del_in_evo = is_subset(s.del, s.evo);
  r.evo_in_avo = is_subset(s.evo, s.avo);
  r.del_in_ab = is_subset(s.del, s.ab);
  r.ab_in_evo = is_subset(s.ab, s.evo);
  return r;
}

}  // namespace evosim
