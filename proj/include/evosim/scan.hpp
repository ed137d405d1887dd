#pragma once

// Parameter sweeps with replication and analytic overlays, written as CSV.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evosim/analytics.hpp"
#include "evosim/config.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/graph.hpp"
#include "evosim/outbreak.hpp"
#include "evosim/rng.hpp"

namespace evosim {

/// Inclusive range min, min+step, ... <= max; a single value is min == max.
struct Grid {
  double min = 0, max = 0, step = 1;

  static Grid single(double v) { return {v, v, 1.0}; }

  /// "v" or "min:max:step".
  static Grid parse(std::string_view text) {
    const std::string s(text);
    const auto number = [&](const std::string& part) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != part.size()) throw ConfigError("bad number '" + part + "' in '" + s + "'");
      return v;
    };
    const auto c1 = s.find(':');
    if (c1 == std::string::npos) return single(number(s));
    const auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string::npos || s.find(':', c2 + 1) != std::string::npos)
      throw ConfigError("grid must be 'value' or 'min:max:step', got '" + s + "'");
    Grid g{number(s.substr(0, c1)), number(s.substr(c1 + 1, c2 - c1 - 1)), number(s.substr(c2 + 1))};
    g.validate();
    return g;
  }

  bool is_single() const { return min == max; }

  void validate() const {
    if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) throw ConfigError("grid must be finite");
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (max < min) throw ConfigError("grid max below min");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> out;
    const double slack = 1e-9 * step;
    for (std::size_t i = 0;; ++i) {
      const double v = min + static_cast<double>(i) * step;
      if (v > max + slack) break;
      out.push_back(std::min(v, max));
    }
    return out;
  }
};

enum class SweptParam { Lambda, Rho, Gamma };

inline std::string_view to_string(SweptParam p) {
  switch (p) {
    case SweptParam::Lambda: return "lambda";
    case SweptParam::Rho: return "rho";
    case SweptParam::Gamma: return "gamma";
  }
  return "?";
}

struct ScanSpec {
  std::string dist = "poisson:5";
  std::size_t n = 1000;
  EpidemicConfig base;  // fixed parameters; the swept one is overwritten per grid point
  SweptParam param = SweptParam::Lambda;
  Grid grid;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool er = false;  // Erdos-Renyi with the Poisson mean instead of CM(n, Poisson)
  bool dynamic = false;  // half-edge construction (avoSI / abAvoSI only)

  void validate() const {
    grid.validate();
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (n < 1) throw ConfigError("n must be at least 1");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (dynamic && !rewires_infected_pairs(base.variant))
      throw ConfigError("the dynamic construction exists for avoSI and abAvoSI only");
    const DegreeDistribution d = DegreeDistribution::parse(dist);
    if (er && d.family() != Family::Poisson)
      throw ConfigError("--er needs a poisson degree law");
    for (double v : grid.values()) with_param(v).validate();
  }

  EpidemicConfig with_param(double v) const {
    EpidemicConfig cfg = base;
    switch (param) {
      case SweptParam::Lambda: cfg.lambda = v; break;
      case SweptParam::Rho: cfg.rho = v; break;
      case SweptParam::Gamma: cfg.gamma = v; break;
    }
    return cfg;
  }
};

struct ScanRow {
  double param = 0;
  OutbreakEstimate estimate;
  std::optional<double> q_analytic;
  std::optional<double> nu_analytic;
  std::string notes;
};

inline constexpr std::string_view kScanCsvHeader =
    "param,p_large,p_large_se,cond_size,cond_size_se,n_large,q_analytic,nu_analytic,notes";

inline std::string format_scan_row(const ScanRow& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os << r.param << ',' << r.estimate.p_large << ',' << r.estimate.p_large_se << ',';
  opt(r.estimate.cond_size);
  os << ',';
  opt(r.estimate.cond_size_se);
  os << ',' << r.estimate.n_large << ',';
  opt(r.q_analytic);
  os << ',';
  opt(r.nu_analytic);
  os << ',';
  std::string notes = r.notes;
  for (char& c : notes)
    if (c == ',' || c == '\n') c = ';';
  os << notes;
  return os.str();
}

/// Large-outbreak probability predicted by the branching-process approximation
/// for the configured variant and duration law.
inline double analytic_outbreak_probability(const DegreeDistribution& dist, const EpidemicConfig& cfg) {
  const bool fixed = cfg.duration == DurationMode::Fixed;
  return bp_survival_sir(dist, cfg.lambda, cfg.rho, is_si(cfg.variant) ? 0.0 : cfg.gamma, fixed);
}

/// Critical infection rate for the configured rates, if one exists.
inline std::optional<double> analytic_lambda_c(const DegreeDistribution& dist, const EpidemicConfig& cfg) {
  if (cfg.duration == DurationMode::Fixed)
    return fixed_time_lambda_c(factorial_moment(dist, 2) / factorial_moment(dist, 1), cfg.rho);
  return critical_values(dist, cfg.rho, is_si(cfg.variant) ? 0.0 : cfg.gamma).lambda_c;
}

/// Overlays for one grid point. nu applies to avoSI below alpha_c.
inline ScanRow scan_overlays(const DegreeDistribution& dist, const EpidemicConfig& cfg) {
  ScanRow row;
  row.q_analytic = analytic_outbreak_probability(dist, cfg);
  std::ostringstream notes;
  notes << std::setprecision(6);
  if (const auto lc = analytic_lambda_c(dist, cfg)) {
    notes << "lambda_c=" << *lc << (cfg.lambda > *lc ? " super" : " sub");
  } else {
    notes << "no giant component";
  }
  // Without rewiring, and with independent per-edge transmissions, the final size of a
  // large outbreak is the giant component of the percolated graph.
  const bool percolation_like = cfg.rho == 0.0 || cfg.effective_rewire_prob() == 0.0;
  const bool independent = is_si(cfg.variant) || cfg.duration == DurationMode::Fixed;
  if (percolation_like && independent && cfg.lambda > 0.0) {
    const double tau = cfg.duration == DurationMode::Fixed ? fixed_time_transmission(cfg.lambda, cfg.rho)
                                                           : cfg.lambda / (cfg.lambda + cfg.rho);
    const double size = dist.family() == Family::Poisson ? 1.0 - er_fixed_point(dist.parameter(), tau)
                                                         : bp_survival_tau(dist, tau);
    notes << " size_analytic=" << size;
  }
  if (cfg.variant == Variant::AvoSI && cfg.lambda > 0.0) {
    const double alpha = alpha_parameter(dist, cfg.lambda, cfg.rho);
    const double alpha_c = moment(dist, 2) - 2.0 * moment(dist, 1);
    if (alpha < alpha_c) {
      const SigmaNu sn = sigma_nu(dist, alpha);
      row.nu_analytic = sn.nu;
      if (!sn.star_holds) notes << " star-fails";
    }
  }
  row.notes = notes.str();
  return row;
}

/// Runs the sweep. Each completed row is written to `csv` (if given) and flushed at once.
/// Grid point i uses root seed derive_seed(spec.seed, i).
inline std::vector<ScanRow> run_scan(const ScanSpec& spec, std::ostream* csv = nullptr) {
  spec.validate();
  const DegreeDistribution dist = DegreeDistribution::parse(spec.dist);
  if (csv) *csv << kScanCsvHeader << '\n' << std::flush;
  std::vector<ScanRow> rows;
  const auto values = spec.grid.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const EpidemicConfig cfg = spec.with_param(values[i]);
    ScanRow row = scan_overlays(dist, cfg);
    row.param = values[i];
    const std::uint64_t point_seed = derive_seed(spec.seed, i);
    if (spec.dynamic) {
      row.estimate = estimate_outbreak_dynamic(dist, spec.n, cfg, spec.trials, cfg.eta, point_seed, spec.workers);
    } else if (spec.er) {
      const double mu = dist.parameter();
      const std::size_t n = spec.n;
      row.estimate = estimate_outbreak([mu, n](std::uint64_t s) { return gen_er(n, mu, s); }, cfg, spec.trials,
                                       cfg.eta, point_seed, spec.workers);
    } else {
      row.estimate = estimate_outbreak(dist, spec.n, cfg, spec.trials, cfg.eta, point_seed, spec.workers);
    }
    if (row.estimate.budget_exceeded > 0)
      row.notes += " budget_exceeded=" + std::to_string(row.estimate.budget_exceeded);
    if (csv) {
      *csv << format_scan_row(row) << '\n' << std::flush;
      if (!*csv) throw std::runtime_error("failed writing scan row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace evosim
