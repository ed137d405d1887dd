#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evosim/rng.hpp"

namespace evosim {

enum class Family { Poisson, Geometric, Regular, Explicit };

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// A degree law D on {0, 1, ..., K}, stored as a finite pmf.
///
/// Named families are truncated at the smallest K whose discarded tail satisfies
/// sum_{k>K} k^5 p_k < 1e-12 (which also bounds the discarded mass), and the kept
/// part is renormalized. Explicit pmfs must sum to 1 within 1e-6 and are renormalized.
class DegreeDistribution {
 public:
  static constexpr double kTailTolerance = 1e-12;

  static DegreeDistribution poisson(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("poisson mean must be positive and finite");
    const auto log_term = [mean](std::size_t k) {
      const double kd = static_cast<double>(k);
      return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
    };
    return from_generator(Family::Poisson, mean, log_term,
                          static_cast<std::size_t>(mean + 60.0 * std::sqrt(mean) + 200.0));
  }

  /// Geometric on {1, 2, ...}: P(D = k) = (1-p)^(k-1) p.
  static DegreeDistribution geometric(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric p must lie in (0, 1]");
    if (p == 1.0) return make(Family::Geometric, p, {0.0, 1.0}, 0.0);
    const double log_q = std::log1p(-p);
    const auto log_term = [p, log_q](std::size_t k) {
      if (k == 0) return -std::numeric_limits<double>::infinity();
      return static_cast<double>(k - 1) * log_q + std::log(p);
    };
    return from_generator(Family::Geometric, p, log_term,
                          static_cast<std::size_t>(200.0 / p + 400.0));
  }

  static DegreeDistribution regular(int r) {
    if (r < 1) throw std::invalid_argument("regular degree must be at least 1");
    std::vector<double> pmf(static_cast<std::size_t>(r) + 1, 0.0);
    pmf.back() = 1.0;
    return make(Family::Regular, r, std::move(pmf), 0.0);
  }

  static DegreeDistribution explicit_pmf(std::vector<double> pmf) {
    if (pmf.empty()) throw std::invalid_argument("pmf must not be empty");
    CompensatedSum total;
    for (double p : pmf) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument("pmf entries must be finite and nonnegative");
      total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-6)
      throw std::invalid_argument("pmf must sum to 1 (within 1e-6)");
    for (double& p : pmf) p /= total.value();
    while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
    return make(Family::Explicit, 0.0, std::move(pmf), 0.0);
  }

  /// Parses "poisson:5.0", "geometric:0.5", "regular:3" or "pmf:p0,p1,...,pK".
  static DegreeDistribution parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
      throw std::invalid_argument("distribution spec needs the form family:parameter");
    const std::string family(spec.substr(0, colon));
    const std::string arg(spec.substr(colon + 1));
    try {
      if (family == "poisson") return poisson(parse_number(arg));
      if (family == "geometric") return geometric(parse_number(arg));
      if (family == "regular") {
        const double r = parse_number(arg);
        if (r != std::floor(r)) throw std::invalid_argument("regular degree must be an integer");
        return regular(static_cast<int>(r));
      }
      if (family == "pmf") {
        std::vector<double> pmf;
        std::stringstream in(arg);
        std::string item;
        while (std::getline(in, item, ',')) pmf.push_back(parse_number(item));
        return explicit_pmf(std::move(pmf));
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("bad distribution spec '" + std::string(spec) + "': " + e.what());
    }
    throw std::invalid_argument("unknown distribution family '" + family + "'");
  }

  std::span<const double> pmf() const { return pmf_; }
  double p(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::size_t max_degree() const { return pmf_.size() - 1; }
  Family family() const { return family_; }
  double parameter() const { return parameter_; }
  double truncation_tail_mass() const { return tail_mass_; }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (family_) {
      case Family::Poisson: out << "poisson:" << parameter_; break;
      case Family::Geometric: out << "geometric:" << parameter_; break;
      case Family::Regular: out << "regular:" << static_cast<int>(parameter_); break;
      case Family::Explicit:
        out << "pmf:";
        for (std::size_t k = 0; k < pmf_.size(); ++k) out << (k ? "," : "") << pmf_[k];
        break;
    }
    return out.str();
  }

  /// Draws a degree by inverse CDF on the truncated pmf.
  std::uint32_t sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = static_cast<std::size_t>(it - cdf_.begin());
    return static_cast<std::uint32_t>(std::min(k, max_degree()));
  }

  bool has_degree_parity(int parity) const {
    for (std::size_t k = 0; k < pmf_.size(); ++k)
      if (pmf_[k] > 0.0 && static_cast<int>(k % 2) == parity) return true;
    return false;
  }

 private:
  DegreeDistribution() = default;

  static double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
  }

  template <class LogTerm>
  static DegreeDistribution from_generator(Family family, double parameter, LogTerm log_term,
                                           std::size_t hard_limit) {
    std::vector<double> raw;
    raw.reserve(hard_limit + 1);
    for (std::size_t k = 0; k <= hard_limit; ++k) raw.push_back(std::exp(log_term(k)));
    // suffix[k] = sum_{j >= k} j^5 p_j, accumulated from the far tail inward
    std::vector<double> weighted_suffix(raw.size() + 1, 0.0);
    std::vector<double> mass_suffix(raw.size() + 1, 0.0);
    for (std::size_t k = raw.size(); k-- > 0;) {
      const double kd = static_cast<double>(k);
      weighted_suffix[k] = weighted_suffix[k + 1] + std::pow(kd, 5) * raw[k];
      mass_suffix[k] = mass_suffix[k + 1] + raw[k];
    }
    std::size_t K = 0;
    while (K + 1 < raw.size() && !(weighted_suffix[K + 1] < kTailTolerance &&
                                   mass_suffix[K + 1] < kTailTolerance))
      ++K;
    std::vector<double> pmf(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(K) + 1);
    CompensatedSum kept;
    for (double p : pmf) kept.add(p);
    for (double& p : pmf) p /= kept.value();
    return make(family, parameter, std::move(pmf), mass_suffix[K + 1]);
  }

  static DegreeDistribution make(Family family, double parameter, std::vector<double> pmf,
                                 double tail) {
    DegreeDistribution d;
    d.family_ = family;
    d.parameter_ = parameter;
    d.pmf_ = std::move(pmf);
    d.tail_mass_ = tail;
    bool positive_degree = false;
    for (std::size_t k = 1; k < d.pmf_.size(); ++k) positive_degree |= d.pmf_[k] > 0.0;
    if (!positive_degree) throw std::invalid_argument("degree law must have positive mean");
    d.cdf_.resize(d.pmf_.size());
    std::partial_sum(d.pmf_.begin(), d.pmf_.end(), d.cdf_.begin());
    return d;
  }

  Family family_ = Family::Explicit;
  double parameter_ = 0.0;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
};

}  // namespace evosim
