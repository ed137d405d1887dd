#pragma once

// Shared randomness for coupled runs. Every variable is a pure function of
// (root seed, edge, activation index, slot), produced by Philox4x32-10, so runs
// that visit edges in different orders still read identical clocks.

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evosim/rng.hpp"

namespace evosim {

struct EdgeClocks {
  double T = 0;          // infection clock, Exp(lambda)
  double R = 0;          // rewiring / deletion clock, Exp(rho)
  std::uint32_t U = 0;   // rewiring target, uniform on [0, n)
  std::uint8_t V = 0;    // which end stays in an I-I rewiring (0: half-edge 2e stays)
  double omega_u = 0;    // uniform on [0, 1), rewire-vs-drop coin for SIR-omega

  friend bool operator==(const EdgeClocks&, const EdgeClocks&) = default;
};

/// Residual clocks of an edge whose second endpoint got infected `w` time units
/// after activation: both rates double, so the residuals are halved.
inline std::pair<double, double> halved_residual(double T, double R, double w) {
  if (!(w >= 0.0)) throw std::domain_error("elapsed time must be nonnegative");
  if (!(T > w) || !(R > w)) throw std::domain_error("clock already fired before the residual point");
  return {(T - w) / 2.0, (R - w) / 2.0};
}

class CouplingBundle {
  /// Endless 64-bit word source for rejection sampling, keyed by (a, b, slot).
  struct WordStream {
    const Philox4x32* philox;
    std::uint32_t a, b, slot;
    std::uint32_t k = 0;
    int half = 0;
    Philox4x32::Block block{};
    std::uint64_t operator()() {
      if (half == 0) block = (*philox)({a, b, slot, k++});
      const std::uint64_t w = half == 0 ? join(block[0], block[1]) : join(block[2], block[3]);
      half ^= 1;
      return w;
    }
  };

  static std::uint64_t join(std::uint32_t hi, std::uint32_t lo) { return (std::uint64_t{hi} << 32) | lo; }

 public:
  CouplingBundle(std::uint64_t root_seed, double lambda, double rho, std::size_t n, bool cache = true)
      : root_seed_(root_seed), lambda_(lambda), rho_(rho), n_(n), cache_enabled_(cache), philox_(root_seed) {
    if (!(lambda >= 0.0) || !(rho >= 0.0)) throw std::invalid_argument("bundle rates must be nonnegative");
    if (n == 0) throw std::invalid_argument("bundle needs n >= 1");
  }

  std::uint64_t root_seed() const { return root_seed_; }
  double lambda() const { return lambda_; }
  double rho() const { return rho_; }
  std::size_t n() const { return n_; }

  /// Clocks of activation `ell` (>= 1) of edge `e`.
  EdgeClocks clocks(std::uint32_t e, std::uint32_t ell) const {
    if (ell < 1) throw std::invalid_argument("activation index starts at 1");
    if (!cache_enabled_) return generate(e, ell);
    const std::uint64_t key = (std::uint64_t{e} << 32) | ell;
    {
      std::shared_lock lock(mutex_);
      if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const EdgeClocks fresh = generate(e, ell);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(key, fresh).first->second;
  }

  /// Uniform vertex used as the initial infective of coupled runs.
  std::uint32_t seed_vertex() const {
    return static_cast<std::uint32_t>(bounded_index(WordStream{&philox_, kReservedEdge, 0, kSlotSeed}, n_));
  }

  /// Exp(gamma) infectious period of vertex v.
  double recovery_time(std::uint32_t v, double gamma) const {
    const auto b = philox_({v, 0u, kSlotRecovery, 0u});
    return unit_to_exponential(bits_to_unit(join(b[0], b[1])), gamma);
  }

  /// Snapshot of every materialized entry, sorted by (edge, ell).
  std::vector<std::tuple<std::uint32_t, std::uint32_t, EdgeClocks>> materialized() const {
    std::vector<std::tuple<std::uint32_t, std::uint32_t, EdgeClocks>> out;
    {
      std::shared_lock lock(mutex_);
      out.reserve(cache_.size());
      for (const auto& [key, c] : cache_)
        out.emplace_back(static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key), c);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    return out;
  }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  static constexpr std::uint32_t kReservedEdge = 0xFFFFFFFFu;
  static constexpr std::uint32_t kSlotClocks = 0, kSlotTarget = 1, kSlotOmega = 2, kSlotSeed = 3,
                                 kSlotRecovery = 4, kSlotExtra = 16;

  EdgeClocks generate(std::uint32_t e, std::uint32_t ell) const {
    EdgeClocks c;
    const auto b0 = philox_({e, ell, kSlotClocks, 0u});
    c.T = unit_to_exponential(bits_to_unit(join(b0[0], b0[1])), lambda_);
    c.R = unit_to_exponential(bits_to_unit(join(b0[2], b0[3])), rho_);
    const auto b1 = philox_({e, ell, kSlotTarget, 0u});
    std::uint64_t first = join(b1[0], b1[1]);
    bool used_first = false;
    WordStream extra{&philox_, e, ell, kSlotExtra};
    c.U = static_cast<std::uint32_t>(bounded_index(
        [&] {
          if (!used_first) {
            used_first = true;
            return first;
          }
          return extra();
        },
        n_));
    c.V = static_cast<std::uint8_t>(b1[2] & 1u);
    const auto b2 = philox_({e, ell, kSlotOmega, 0u});
    c.omega_u = bits_to_unit(join(b2[0], b2[1]));
    return c;
  }

  std::uint64_t root_seed_;
  double lambda_, rho_;
  std::size_t n_;
  bool cache_enabled_;
  Philox4x32 philox_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::uint64_t, EdgeClocks> cache_;
};

}  // namespace evosim
