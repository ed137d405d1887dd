#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "evosim/analytics.hpp"
#include "evosim/rng.hpp"

using namespace evosim;

namespace {

// Closed-form f for Poisson(mu): G(w) = exp(mu (w-1)), G'(w) = mu G(w).
long double poisson_f(long double mu, long double alpha, long double w) {
  const long double g = std::exp(mu * (w - 1));
  return std::log(mu * w / (g * (mu + alpha * (1 - w)))) + alpha / 2 * (w - 1) * (w - 1);
}

// Largest zero of poisson_f in (0, 1) by a fine scan then bisection; 0 if none.
double oracle_sigma(double mu, double alpha) {
  long double hi = 1.0L - 1e-7L;
  for (long double w = hi - 1e-5L; w > 0; w -= 1e-5L) {
    if (poisson_f(mu, alpha, w) <= 0) {
      long double lo = w;
      for (int i = 0; i < 200; ++i) {
        const long double mid = (lo + hi) / 2;
        (poisson_f(mu, alpha, mid) > 0 ? hi : lo) = mid;
      }
      return static_cast<double>((lo + hi) / 2);
    }
    hi = w;
  }
  return 0.0;
}

// z = exp(-c (1 - z)) by Newton from z = 0.
double oracle_er_root(double c) {
  double z = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double g = z - std::exp(-c * (1 - z));
    const double dg = 1 - c * std::exp(-c * (1 - z));
    z -= g / dg;
  }
  return z;
}

}  // namespace

TEST(Moments, PoissonClosedForms) {
  const double mu = 5.0;
  const auto d = DegreeDistribution::poisson(mu);
  EXPECT_NEAR(moment(d, 1), mu, 1e-10);
  EXPECT_NEAR(moment(d, 2), mu + mu * mu, 1e-9);
  EXPECT_NEAR(moment(d, 3), mu * mu * mu + 3 * mu * mu + mu, 1e-8);
  EXPECT_NEAR(factorial_moment(d, 2), mu * mu, 1e-9);
  EXPECT_NEAR(factorial_moment(d, 3), mu * mu * mu, 1e-8);
  EXPECT_THROW(moment(d, 0), std::invalid_argument);
  EXPECT_THROW(factorial_moment(d, 4), std::invalid_argument);
}

TEST(Delta, RegularClosedForm) {
  for (int r = 3; r <= 10; ++r)
    EXPECT_NEAR(delta(DegreeDistribution::regular(r)), (r - 2.0) * (2.0 * r + 1.0), 1e-9) << r;
}

TEST(Delta, GeometricClosedForm) {
  for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6})
    EXPECT_NEAR(delta(DegreeDistribution::geometric(p)), 3.0 / p - 6.0, 1e-9) << p;
}

TEST(Delta, PoissonIsTwoMuSquaredMinusThreeMu) {
  for (double mu : {0.5, 1.2, 1.5, 3.0, 5.0})
    EXPECT_NEAR(delta(DegreeDistribution::poisson(mu)), 2 * mu * mu - 3 * mu, 1e-9) << mu;
  EXPECT_LT(delta(DegreeDistribution::poisson(1.499)), 0.0);
  EXPECT_GT(delta(DegreeDistribution::poisson(1.501)), 0.0);
}

TEST(CriticalValues, PoissonFiveRhoFour) {
  const auto cs = critical_values(DegreeDistribution::poisson(5), 4.0, 0.0);
  EXPECT_NEAR(cs.alpha_c, 20.0, 1e-9);
  ASSERT_TRUE(cs.lambda_c.has_value());
  EXPECT_NEAR(*cs.lambda_c, 1.0, 1e-10);
  EXPECT_NEAR(*cs.lambda_c_for(8.0, 0.0), 2.0, 1e-10);
}

TEST(CriticalValues, RhoCriticalWithRecovery) {
  const auto cs = critical_values(DegreeDistribution::poisson(5), 0.0, 1.0);
  ASSERT_TRUE(cs.rho_c(1.0).has_value());
  EXPECT_NEAR(*cs.rho_c(1.0), 3.0, 1e-10);
}

TEST(CriticalValues, SubcriticalGraphHasNoLambdaC) {
  const auto cs = critical_values(DegreeDistribution::poisson(0.8), 1.0, 0.0);
  EXPECT_FALSE(cs.supercritical_graph());
  EXPECT_FALSE(cs.lambda_c.has_value());
  EXPECT_FALSE(cs.rho_c(1.0).has_value());
  EXPECT_THROW(critical_values(DegreeDistribution::poisson(2), -1.0, 0.0), std::invalid_argument);
}

TEST(FixedTime, TransmissionFormula) {
  EXPECT_NEAR(fixed_time_transmission(1.0, 0.0), 1 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(fixed_time_transmission(2.0, 3.0), 0.4 * (1 - std::exp(-5.0)), 1e-15);
  EXPECT_EQ(fixed_time_transmission(0.0, 0.0), 0.0);
}

TEST(FixedTime, LambdaCritical) {
  const auto lc = fixed_time_lambda_c(5.0, 4.0);
  ASSERT_TRUE(lc.has_value());
  EXPECT_NEAR(*lc, 1.0084, 5e-4);
  // Independent check: the root of 5 tau(lambda) = 1 by the secant method.
  double a = 0.5, b = 2.0;
  const auto r = [](double l) { return 5.0 * l / (l + 4.0) * (1 - std::exp(-(l + 4.0))) - 1.0; };
  for (int i = 0; i < 60 && r(b) != r(a); ++i) {
    const double c = b - r(b) * (b - a) / (r(b) - r(a));
    a = b;
    b = c;
  }
  EXPECT_NEAR(*lc, b, 1e-9);
  EXPECT_NEAR(*lc, 1.008422137, 1e-8);
  EXPECT_FALSE(fixed_time_lambda_c(1.0, 0.0).has_value());
  EXPECT_NEAR(*fixed_time_lambda_c(1.2, 1e6), 5e6, 1.0);
}

TEST(GeneratingFunction, ValuesAtOne) {
  const auto d = DegreeDistribution::poisson(4);
  EXPECT_NEAR(gf_eval(d, 1.0, 0), 1.0, 1e-14);
  EXPECT_NEAR(gf_eval(d, 1.0, 1), 4.0, 1e-12);
  EXPECT_NEAR(gf_eval(d, 1.0, 2), 16.0, 1e-10);
  EXPECT_NEAR(gf_eval(d, 1.0, 3), 64.0, 1e-9);
  EXPECT_NEAR(gf_eval(d, 0.3, 0), std::exp(4 * (0.3 - 1)), 1e-14);
  EXPECT_NEAR(size_biased_gf(d, 0.3), std::exp(4 * (0.3 - 1)), 1e-13);
  EXPECT_THROW(gf_eval(d, 0.5, 4), std::invalid_argument);
}

TEST(FFunction, ValueAtOneIsZero) {
  for (double alpha : {0.0, 1.0, 5.0, 19.0}) EXPECT_EQ(f_eval(DegreeDistribution::poisson(5), alpha, 1.0), 0.0);
}

TEST(FFunction, MatchesPoissonClosedForm) {
  const auto d = DegreeDistribution::poisson(3);
  for (double w : {0.05, 0.3, 0.7, 0.99})
    EXPECT_NEAR(f_eval(d, 1.7, w), static_cast<double>(poisson_f(3, 1.7, w)), 1e-11) << w;
}

TEST(FFunction, DerivativesAtOne) {
  struct Case {
    const char* dist;
    double alpha_frac;
  };
  const std::vector<Case> cases{
      {"poisson:5", 0.5}, {"poisson:5", 1.0}, {"poisson:3", 0.2},  {"poisson:3", 1.0},   {"poisson:2", 0.9},
      {"poisson:2", 1.0}, {"regular:3", 0.5}, {"regular:3", 1.0},  {"regular:6", 0.1},   {"regular:6", 1.0},
      {"geometric:0.3", 0.4}, {"geometric:0.3", 1.0}, {"geometric:0.5", 0.7}, {"geometric:0.5", 1.0},
      {"poisson:1.4", 0.5}, {"poisson:1.4", 1.0}, {"regular:4", 0.0}, {"regular:4", 1.0},
      {"pmf:0.1,0.2,0.3,0.2,0.2", 0.6}, {"pmf:0.1,0.2,0.3,0.2,0.2", 1.0}};
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    const auto d = DegreeDistribution::parse(c.dist);
    const double m1 = moment(d, 1), alpha_c = moment(d, 2) - 2 * m1;
    const double alpha = c.alpha_frac * alpha_c;
    const double h = 1e-4;
    const auto f = [&](double w) { return f_eval(d, alpha, w); };
    const double d1 = (f(1 + h) - f(1 - h)) / (2 * h);
    EXPECT_NEAR(d1, -(alpha_c - alpha) / m1, 1e-6) << c.dist << " " << c.alpha_frac;
    if (c.alpha_frac == 1.0) {
      const double d2 = (f(1 + h) - 2 * f(1.0) + f(1 - h)) / (h * h);
      EXPECT_NEAR(d2, delta(d), 1e-4) << c.dist;
    }
  }
}

TEST(SigmaNu, PoissonFiveMatchesClosedFormOracle) {
  const auto d = DegreeDistribution::poisson(5);
  const auto sn = sigma_nu(d, 10.0);
  const double sigma = oracle_sigma(5, 10);
  EXPECT_NEAR(sn.sigma, sigma, 1e-9);
  EXPECT_NEAR(sn.sigma, 1.36466e-4, 1e-9);
  EXPECT_NEAR(sn.nu, 1 - std::exp(-5 * (sigma - 1) * (sigma - 1) + 5 * (sigma - 1)), 1e-9);
  EXPECT_NEAR(sn.nu, 0.99995451, 1e-8);
  EXPECT_TRUE(sn.star_holds);
}

TEST(SigmaNu, SeveralPoissonPoints) {
  for (double mu : {2.0, 3.0, 4.0})
    for (double frac : {0.2, 0.5, 0.8}) {
      const double a = frac * (mu * mu - mu);
      const auto sn = sigma_nu(DegreeDistribution::poisson(mu), a);
      EXPECT_NEAR(sn.sigma, oracle_sigma(mu, a), 1e-8) << mu << " " << frac;
      EXPECT_GT(sn.nu, 0.0);
      EXPECT_LT(sn.nu, 1.0 + 1e-12);
    }
}

TEST(SigmaNu, RegularWithoutInteriorRootHasSigmaZero) {
  const auto sn = sigma_nu(DegreeDistribution::regular(3), 1.5);
  EXPECT_EQ(sn.sigma, 0.0);
  EXPECT_NEAR(sn.nu, 1.0, 1e-15);  // G(0) = 0
  EXPECT_TRUE(sn.star_holds);
}

TEST(SigmaNu, RejectsAlphaAtOrAboveCritical) {
  EXPECT_THROW(sigma_nu(DegreeDistribution::poisson(5), 20.0), std::invalid_argument);
  EXPECT_THROW(sigma_nu(DegreeDistribution::poisson(5), -1.0), std::invalid_argument);
}

TEST(ErFixedPoint, MatchesNewtonOracle) {
  EXPECT_NEAR(er_fixed_point(2.0, 1.0), oracle_er_root(2.0), 1e-10);
  EXPECT_NEAR(1 - er_fixed_point(4.0, 0.5), 0.7968, 1e-4);
  EXPECT_EQ(er_fixed_point(2.0, 0.4), 1.0);
  EXPECT_THROW(er_fixed_point(0.0, 0.5), std::invalid_argument);
}

TEST(BpSurvival, PoissonEqualsErGiant) {
  const auto d = DegreeDistribution::poisson(5);
  for (double lambda : {1.2, 1.5, 2.0}) {
    const double tau = lambda / (lambda + 4.0);
    EXPECT_NEAR(bp_survival(d, lambda, 4.0), 1 - oracle_er_root(5 * tau), 1e-9) << lambda;
  }
  EXPECT_EQ(bp_survival(d, 0.9, 4.0), 0.0);
  EXPECT_EQ(bp_survival(d, 0.0, 4.0), 0.0);
}

TEST(BpSurvival, RegularThreeClosedForm) {
  // Later generations Binomial(2, tau): extinction xi = ((1 - tau)/tau)^2, q = 1 - (1 - tau + tau xi)^3.
  const double tau = 0.75;
  const double xi = std::pow((1 - tau) / tau, 2);
  const double expected = 1 - std::pow(1 - tau + tau * xi, 3);
  EXPECT_NEAR(bp_survival_tau(DegreeDistribution::regular(3), tau), expected, 1e-10);
}

TEST(BpSurvivalSir, ReducesToSiAndFixedCases) {
  const auto d = DegreeDistribution::poisson(5);
  EXPECT_NEAR(bp_survival_sir(d, 1.5, 4, 0, false), bp_survival(d, 1.5, 4), 1e-12);
  EXPECT_NEAR(bp_survival_sir(d, 1.5, 4, 0, true), bp_survival_tau(d, fixed_time_transmission(1.5, 4)), 1e-12);
  EXPECT_NEAR(bp_survival_sir(d, 1.5, 4, 1e-6, false), bp_survival(d, 1.5, 4), 1e-4);
}

TEST(BpSurvivalSir, ExponentialDurationAgainstMonteCarlo) {
  // Offspring of an infective with duration d ~ Exp(gamma): Binomial(k, tau(d)).
  const auto d = DegreeDistribution::poisson(3);
  const double lambda = 1.0, rho = 0.5, gamma = 0.5;
  Rng rng(21);
  const int trials = 20000;
  int survived = 0;
  const auto tau_of = [&](double dur) { return lambda / (lambda + rho) * -std::expm1(-(lambda + rho) * dur); };
  // Offspring law D* - 1 for Poisson is Poisson again.
  for (int t = 0; t < trials; ++t) {
    std::uint64_t pop = rng.binomial(d.sample(rng), tau_of(rng.exponential(gamma)));
    int gen = 0;
    while (pop > 0 && pop < 2000 && gen < 200) {
      std::uint64_t next = 0;
      for (std::uint64_t i = 0; i < pop; ++i) next += rng.binomial(d.sample(rng), tau_of(rng.exponential(gamma)));
      pop = next;
      ++gen;
    }
    survived += pop > 0;
  }
  const double p = static_cast<double>(survived) / trials;
  const double q = bp_survival_sir(d, lambda, rho, gamma, false);
  EXPECT_NEAR(q, p, 3.5 * std::sqrt(p * (1 - p) / trials));
}

TEST(LimitCurves, InitialValues) {
  const auto d = DegreeDistribution::poisson(5);
  const auto lp = limit_curves(d, 10.0, 0.0);
  EXPECT_NEAR(lp.x, 5.0, 1e-10);
  EXPECT_NEAR(lp.s, 1.0, 1e-12);
  EXPECT_NEAR(lp.x_s, 5.0, 1e-10);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(lp.s_k[k], d.p(k), 1e-14);
}

TEST(LimitCurves, SkSumsToF0AndF1) {
  const auto d = DegreeDistribution::poisson(3);
  for (double t : {0.1, 0.5, 1.0}) {
    const auto lp = limit_curves(d, 2.0, t);
    double s = 0, xs = 0;
    for (std::size_t k = 0; k < lp.s_k.size(); ++k) {
      s += lp.s_k[k];
      xs += static_cast<double>(k) * lp.s_k[k];
    }
    EXPECT_NEAR(s, lp.s, 1e-10) << t;
    EXPECT_NEAR(xs, lp.x_s, 1e-9) << t;
    EXPECT_NEAR(lp.x, 3 * std::exp(-2 * t), 1e-12);
  }
  EXPECT_EQ(limit_curves(d, 2.0, 0.5, 4).s_k.size(), 5u);
  EXPECT_THROW(limit_curves(d, 2.0, -0.1), std::invalid_argument);
}

TEST(SigmaNu, ContinuousCaseSigmaTendsToOne) {
  // Delta < 0: the root approaches 1 as alpha rises to alpha_c, and nu vanishes.
  const auto d = DegreeDistribution::poisson(1.4);
  const double alpha_c = 1.4 * 1.4 - 1.4;
  const auto sn = sigma_nu(d, alpha_c - 1e-3);
  EXPECT_GT(sn.sigma, 0.9);
  EXPECT_LT(sn.nu, 0.05);
  EXPECT_GT(sn.sigma, sigma_nu(d, alpha_c - 0.1).sigma);
}
