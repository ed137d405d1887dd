#pragma once

// Closed-form quantities of SI epidemics with rewiring on configuration-model
// graphs: moments, generating functions, critical values, the discriminant Delta,
// the avoSI final-size function f(w) with its root sigma and limit nu, branching
// process survival, and the time-changed limit curves of the half-edge process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evosim/degree_distribution.hpp"

namespace evosim {

/// m_i = E(D^i) for i in 1..5.
inline double moment(const DegreeDistribution& dist, int i) {
  if (i < 1 || i > 5) throw std::invalid_argument("moment order must lie in 1..5");
  CompensatedSum sum;
  const auto pmf = dist.pmf();
  for (std::size_t k = 1; k < pmf.size(); ++k) sum.add(std::pow(static_cast<double>(k), i) * pmf[k]);
  return sum.value();
}

/// mu_k = E[D(D-1)...(D-k+1)] = G^(k)(1) for k in 1..3.
inline double factorial_moment(const DegreeDistribution& dist, int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("factorial moment order must lie in 1..3");
  CompensatedSum sum;
  const auto pmf = dist.pmf();
  for (std::size_t d = 1; d < pmf.size(); ++d) {
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= static_cast<double>(d) - j;
    sum.add(falling * pmf[d]);
  }
  return sum.value();
}

/// Delta = -mu_3/mu_1 + 3(mu_2 - mu_1). Positive means a discontinuous evoSI transition.
inline double delta(const DegreeDistribution& dist) {
  const double mu1 = factorial_moment(dist, 1);
  const double mu2 = factorial_moment(dist, 2);
  const double mu3 = factorial_moment(dist, 3);
  return -mu3 / mu1 + 3.0 * (mu2 - mu1);
}

/// alpha = rho m_1 / lambda, the single parameter that fixes criticality in SI models.
inline double alpha_parameter(const DegreeDistribution& dist, double lambda, double rho) {
  if (!(lambda > 0.0)) throw std::invalid_argument("alpha needs lambda > 0");
  return rho * moment(dist, 1) / lambda;
}

struct CriticalSummary {
  double m1 = 0, m2 = 0, m3 = 0;
  double mu1 = 0, mu2 = 0, mu3 = 0;
  double alpha_c = 0;  // m2 - 2 m1
  double delta = 0;
  double rho = 0, gamma = 0;
  /// Absent when alpha_c <= 0: the graph has no giant component, so no lambda is supercritical.
  std::optional<double> lambda_c;

  bool supercritical_graph() const { return alpha_c > 0.0; }

  /// lambda_c for other rates on the same graph law.
  std::optional<double> lambda_c_for(double rho_, double gamma_) const {
    if (!supercritical_graph()) return std::nullopt;
    return (gamma_ + rho_) * m1 / alpha_c;
  }

  /// Critical rewiring rate at fixed lambda, gamma: rho_c = lambda (m2 - 2 m1)/m1 - gamma.
  std::optional<double> rho_c(double lambda) const {
    if (!supercritical_graph()) return std::nullopt;
    return lambda * alpha_c / m1 - gamma;
  }
};

inline CriticalSummary critical_values(const DegreeDistribution& dist, double rho, double gamma) {
  if (!(rho >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("rates must be nonnegative");
  CriticalSummary s;
  s.m1 = moment(dist, 1);
  s.m2 = moment(dist, 2);
  s.m3 = moment(dist, 3);
  s.mu1 = factorial_moment(dist, 1);
  s.mu2 = factorial_moment(dist, 2);
  s.mu3 = factorial_moment(dist, 3);
  s.alpha_c = s.m2 - 2.0 * s.m1;
  s.delta = -s.mu3 / s.mu1 + 3.0 * (s.mu2 - s.mu1);
  s.rho = rho;
  s.gamma = gamma;
  if (s.alpha_c > 0.0) s.lambda_c = (gamma + rho) * s.m1 / s.alpha_c;
  return s;
}

/// Probability that an S-I edge transmits before rewiring and before a recovery at
/// fixed time 1: lambda/(lambda+rho) * (1 - exp(-(lambda+rho))).
inline double fixed_time_transmission(double lambda, double rho) {
  if (!(lambda >= 0.0) || !(rho >= 0.0)) throw std::invalid_argument("rates must be nonnegative");
  const double total = lambda + rho;
  if (total == 0.0) return 0.0;
  return lambda / total * -std::expm1(-total);
}

/// The lambda solving mu * fixed_time_transmission(lambda, rho) = 1, or nothing when
/// the product stays <= 1 for every lambda (mu <= 1).
inline std::optional<double> fixed_time_lambda_c(double mu, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
  if (!(mu > 1.0)) return std::nullopt;
  const auto residual = [&](double lambda) { return mu * fixed_time_transmission(lambda, rho) - 1.0; };
  constexpr double kLambdaMax = 1e12;
  double lo = 0.0, hi = 1.0;
  while (residual(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kLambdaMax) return std::nullopt;
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) < 1e-10 && hi - lo < 1e-12 * std::max(1.0, mid)) break;
    (r > 0.0 ? hi : lo) = mid;
  }
  return mid;
}

/// G(w), G'(w), G''(w) or G'''(w) by direct summation over the pmf.
inline double gf_eval(const DegreeDistribution& dist, double w, int order) {
  if (order < 0 || order > 3) throw std::invalid_argument("gf order must lie in 0..3");
  const auto pmf = dist.pmf();
  CompensatedSum sum;
  for (std::size_t k = static_cast<std::size_t>(order); k < pmf.size(); ++k) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(k) - j;
    sum.add(falling * pmf[k] * std::pow(w, static_cast<double>(k) - order));
  }
  return sum.value();
}

/// Generating function of D* - 1: G'(z)/G'(1).
inline double size_biased_gf(const DegreeDistribution& dist, double z) {
  return gf_eval(dist, z, 1) / gf_eval(dist, 1.0, 1);
}

/// f(w) = log(m1 w / (G'(w) + alpha (1-w) G(w))) + (alpha/2)(w-1)^2.
inline double f_eval(const DegreeDistribution& dist, double alpha, double w) {
  const double denom = gf_eval(dist, w, 1) + alpha * (1.0 - w) * gf_eval(dist, w, 0);
  if (!(denom > 0.0)) throw std::domain_error("f(w): nonpositive denominator");
  if (w == 1.0) return 0.0;
  return std::log(moment(dist, 1) * w / denom) + 0.5 * alpha * (w - 1.0) * (w - 1.0);
}

struct SigmaNu {
  double sigma = 0.0;
  double nu = 0.0;
  /// Condition: sigma == 0, or f < 0 on the sampled left neighbourhood of sigma.
  bool star_holds = true;
  /// Largest f value seen on the left-neighbourhood samples (negative when the condition holds).
  double star_worst = 0.0;
};

struct SigmaNuOptions {
  double start_offset = 1e-6;
  double scan_step = 1e-4;
  double bisect_tol = 1e-10;
  double check_width = 1e-3;
  int check_samples = 32;
};

/// sigma = largest zero of f in (0, 1) (0 if none is found on the scan grid) and
/// nu = 1 - exp(-(alpha/2)(sigma-1)^2) G(sigma). Requires alpha < alpha_c.
inline SigmaNu sigma_nu(const DegreeDistribution& dist, double alpha, const SigmaNuOptions& opt = {}) {
  const double alpha_c = moment(dist, 2) - 2.0 * moment(dist, 1);
  if (!(alpha < alpha_c)) throw std::invalid_argument("sigma_nu requires alpha < alpha_c");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  const auto f = [&](double w) { return f_eval(dist, alpha, w); };

  const auto bisect = [&](double lo, double hi) {  // f(lo) <= 0 < f(hi)
    while (hi - lo > opt.bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  };

  SigmaNu out;
  double upper = 1.0 - opt.start_offset;
  if (f(upper) <= 0.0) {
    // The positive region next to 1 is narrower than the scan offset.
    const double near_one = 1.0 - 1e-12;
    out.sigma = f(near_one) > 0.0 ? bisect(upper, near_one) : upper;
  } else {
    out.sigma = 0.0;
    for (double w = upper - opt.scan_step; w > 0.0; w -= opt.scan_step) {
      if (f(w) <= 0.0) {
        out.sigma = bisect(w, upper);
        break;
      }
      upper = w;
    }
  }

  if (out.sigma > 0.0) {
    out.star_worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < opt.check_samples; ++i) {
      const double w = out.sigma - opt.check_width * (i + 0.5) / opt.check_samples;
      if (w <= 0.0) break;
      out.star_worst = std::max(out.star_worst, f(w));
    }
    out.star_holds = out.star_worst < 0.0;
  }
  const double gap = out.sigma - 1.0;
  out.nu = 1.0 - std::exp(-0.5 * alpha * gap * gap) * gf_eval(dist, out.sigma, 0);
  return out;
}

/// Smallest fixed point in [0, 1] of z = exp(-mu tau (1 - z)).
inline double er_fixed_point(double mu, double tau) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  const double c = mu * tau;
  if (c <= 1.0) return 1.0;
  double z = 0.0;
  for (long iter = 0; iter < 100'000'000L; ++iter) {
    const double next = std::exp(-c * (1.0 - z));
    if (std::abs(next - z) < 1e-12) return next;
    z = next;
  }
  return z;
}

/// Survival probability of the two-phase branching process with first-generation
/// offspring Binomial(D, tau) and later offspring Binomial(D* - 1, tau).
inline double bp_survival_tau(const DegreeDistribution& dist, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  const double mean_offspring = tau * factorial_moment(dist, 2) / factorial_moment(dist, 1);
  if (mean_offspring <= 1.0) return 0.0;
  double xi = 0.0;
  for (long iter = 0; iter < 100'000'000L; ++iter) {
    const double next = size_biased_gf(dist, 1.0 - tau + tau * xi);
    const bool done = std::abs(next - xi) < 1e-12;
    xi = next;
    if (done) break;
  }
  return 1.0 - gf_eval(dist, 1.0 - tau + tau * xi, 0);
}

/// Large-outbreak probability q(lambda) for SI with rewiring/deletion rate rho.
inline double bp_survival(const DegreeDistribution& dist, double lambda, double rho) {
  if (!(lambda > 0.0)) {
    if (lambda == 0.0) return 0.0;
    throw std::invalid_argument("lambda must be nonnegative");
  }
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
  return bp_survival_tau(dist, lambda / (lambda + rho));
}

/// Large-outbreak probability when each infective stays infectious for a random time d
/// and each of its edges transmits independently with probability
/// lambda/(lambda+rho) (1 - exp(-(lambda+rho) d)). `fixed_duration` means d = 1;
/// otherwise d ~ Exp(gamma), and gamma = 0 is the SI case.
inline double bp_survival_sir(const DegreeDistribution& dist, double lambda, double rho, double gamma,
                              bool fixed_duration) {
  if (!(lambda >= 0.0) || !(rho >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("rates must be nonnegative");
  if (lambda == 0.0) return 0.0;
  if (fixed_duration) return bp_survival_tau(dist, fixed_time_transmission(lambda, rho));
  const double tau_si = lambda / (lambda + rho);
  if (gamma == 0.0) return bp_survival_tau(dist, tau_si);

  // Quadrature over u = exp(-gamma d) ~ U(0,1), substituted u = v^4 to tame u^c near 0.
  constexpr int kNodes = 1024;
  std::vector<double> tau(kNodes), weight(kNodes);
  const double c = (lambda + rho) / gamma;
  for (int j = 0; j < kNodes; ++j) {
    const double v = (j + 0.5) / kNodes;
    const double u = v * v * v * v;
    tau[j] = tau_si * (1.0 - std::pow(u, c));
    weight[j] = 4.0 * v * v * v / kNodes;
  }
  const auto mix = [&](auto&& pgf, double s) {
    CompensatedSum acc;
    for (int j = 0; j < kNodes; ++j) acc.add(weight[j] * pgf(1.0 - tau[j] + tau[j] * s));
    return acc.value();
  };
  const auto later = [&](double s) { return mix([&](double z) { return size_biased_gf(dist, z); }, s); };

  double mean_tau = 0.0;
  for (int j = 0; j < kNodes; ++j) mean_tau += weight[j] * tau[j];
  if (mean_tau * factorial_moment(dist, 2) / factorial_moment(dist, 1) <= 1.0) return 0.0;

  // Smallest fixed point of the convex map `later` on [0, 1).
  double lo = 0.0, hi = 1.0 - 1e-9;
  if (later(hi) - hi >= 0.0) return 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (later(mid) - mid > 0.0 ? lo : hi) = mid;
  }
  const double xi = 0.5 * (lo + hi);
  return 1.0 - mix([&](double z) { return gf_eval(dist, z, 0); }, xi);
}

struct LimitPoint {
  double x = 0;    // total free half-edges / n
  double s = 0;    // susceptible vertices / n
  double x_s = 0;  // susceptible half-edges / n
  std::vector<double> s_k;
};

/// F0(w) = exp(-(alpha/2)(w-1)^2) G(w).
inline double limit_f0(const DegreeDistribution& dist, double alpha, double w) {
  return std::exp(-0.5 * alpha * (w - 1.0) * (w - 1.0)) * gf_eval(dist, w, 0);
}

/// F1(w) = exp(-(alpha/2)(w-1)^2) w (G'(w) + alpha (1-w) G(w)).
inline double limit_f1(const DegreeDistribution& dist, double alpha, double w) {
  return std::exp(-0.5 * alpha * (w - 1.0) * (w - 1.0)) * w *
         (gf_eval(dist, w, 1) + alpha * (1.0 - w) * gf_eval(dist, w, 0));
}

/// Limits of the time-changed half-edge process at time t, with w = exp(-t).
/// When k_max is omitted the s_k vector is extended until its tail is negligible.
inline LimitPoint limit_curves(const DegreeDistribution& dist, double alpha, double t,
                               std::optional<std::size_t> k_max = std::nullopt) {
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  const double w = std::exp(-t);
  LimitPoint out;
  out.x = moment(dist, 1) * w * w;
  out.s = limit_f0(dist, alpha, w);
  out.x_s = limit_f1(dist, alpha, w);

  const double c = alpha * (1.0 - w);
  const double prefactor = std::exp(-0.5 * alpha * (1.0 - w * w));
  const std::size_t K = dist.max_degree();
  const std::size_t hard_cap = K + 2000;
  const std::size_t settle = K + static_cast<std::size_t>(c) + 16;
  for (std::size_t k = 0;; ++k) {
    if (k_max && k > *k_max) break;
    CompensatedSum sum;
    double term = 1.0;  // c^l / l!
    for (std::size_t l = 0; l <= k; ++l) {
      if (l > 0) term *= c / static_cast<double>(l);
      sum.add(dist.p(k - l) * term);
    }
    const double sk = prefactor * std::pow(w, static_cast<double>(k)) * sum.value();
    out.s_k.push_back(sk);
    if (!k_max && ((k > settle && sk < 1e-20) || k >= hard_cap)) break;
  }
  return out;
}

}  // namespace evosim
