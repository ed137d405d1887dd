#pragma once

// Multigraph with stable half-edge identities. Edge e consists of half-edges 2e
// and 2e+1; unpaired half-edges (only needed for serialized mid-run states) take
// ids from 2m upward. Rewiring moves a half-edge to another vertex, never renames it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evosim/degree_distribution.hpp"
#include "evosim/rng.hpp"

namespace evosim {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EdgeHandle {
  std::uint32_t edge = 0;
  std::uint32_t version = 0;
};

class HalfEdgeGraph {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  HalfEdgeGraph() = default;

  /// Builds a graph from an edge list (u, v) and owners of extra unpaired half-edges.
  HalfEdgeGraph(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                const std::vector<std::uint32_t>& unpaired_owners = {}) {
    if (n == 0) throw std::invalid_argument("graph needs at least one vertex");
    if (n >= kNone) throw std::invalid_argument("too many vertices");
    n_ = n;
    edges_ = edges.size();
    const std::size_t total = 2 * edges.size() + unpaired_owners.size();
    if (total >= kNone) throw std::invalid_argument("too many half-edges");
    owner_.resize(total);
    slot_.resize(total);
    incident_.assign(n, {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
      owner_[2 * e] = edges[e].first;
      owner_[2 * e + 1] = edges[e].second;
    }
    for (std::size_t i = 0; i < unpaired_owners.size(); ++i) owner_[2 * edges.size() + i] = unpaired_owners[i];
    for (std::uint32_t h = 0; h < total; ++h) {
      if (owner_[h] >= n) throw std::invalid_argument("half-edge owner out of range");
      slot_[h] = static_cast<std::uint32_t>(incident_[owner_[h]].size());
      incident_[owner_[h]].push_back(h);
    }
    activation_.assign(edges_, 0);
    version_.assign(edges_, 0);
  }

  std::size_t n() const { return n_; }
  std::size_t num_edges() const { return edges_; }
  std::size_t num_half_edges() const { return owner_.size(); }
  std::size_t num_unpaired() const { return owner_.size() - 2 * edges_; }

  std::uint32_t owner(std::uint32_t h) const { return owner_.at(h); }
  bool is_paired(std::uint32_t h) const { return h < 2 * edges_; }
  std::uint32_t partner(std::uint32_t h) const { return is_paired(h) ? (h ^ 1u) : kNone; }
  static std::uint32_t edge_of(std::uint32_t h) { return h >> 1; }
  static std::uint32_t half_edge(std::uint32_t e, int side) { return 2 * e + static_cast<std::uint32_t>(side); }

  std::pair<std::uint32_t, std::uint32_t> endpoints(std::uint32_t e) const {
    return {owner_[2 * e], owner_[2 * e + 1]};
  }

  std::size_t degree(std::uint32_t v) const { return incident_.at(v).size(); }
  std::span<const std::uint32_t> half_edges(std::uint32_t v) const { return incident_.at(v); }

  std::uint32_t activation(std::uint32_t e) const { return activation_.at(e); }
  /// Called by engines when an edge (re-)enters the active set; returns the new counter.
  std::uint32_t advance_activation(std::uint32_t e) { return ++activation_.at(e); }

  EdgeHandle handle(std::uint32_t e) const {
    if (e >= edges_) throw GraphError("edge id out of range");
    return {e, version_[e]};
  }

  bool is_current(EdgeHandle h) const { return h.edge < edges_ && version_[h.edge] == h.version; }

  /// Moves half-edge 2e+end to `target`. The handle must be current; a fresh one is returned.
  EdgeHandle rewire(EdgeHandle h, int end, std::uint32_t target) {
    if (!is_current(h)) throw GraphError("stale edge handle");
    if (end != 0 && end != 1) throw GraphError("edge end must be 0 or 1");
    if (target >= n_) throw GraphError("rewire target out of range");
    move_half_edge(half_edge(h.edge, end), target);
    ++version_[h.edge];
    return {h.edge, version_[h.edge]};
  }

  /// Raw ownership move without handle checks, for engines that manage their own state.
  void move_half_edge(std::uint32_t h, std::uint32_t target) {
    const std::uint32_t from = owner_[h];
    if (from == target) return;
    auto& src = incident_[from];
    const std::uint32_t at = slot_[h];
    const std::uint32_t last = src.back();
    src[at] = last;
    slot_[last] = at;
    src.pop_back();
    slot_[h] = static_cast<std::uint32_t>(incident_[target].size());
    incident_[target].push_back(h);
    owner_[h] = target;
  }

  /// Throws GraphError if ownership, slot indices or degree accounting disagree.
  void check_invariants() const {
    std::size_t degree_sum = 0;
    for (std::uint32_t v = 0; v < n_; ++v) {
      degree_sum += incident_[v].size();
      for (std::size_t i = 0; i < incident_[v].size(); ++i) {
        const std::uint32_t h = incident_[v][i];
        if (h >= owner_.size() || owner_[h] != v || slot_[h] != i)
          throw GraphError("incidence list disagrees with ownership map");
      }
    }
    if (degree_sum != owner_.size()) throw GraphError("degree sum differs from half-edge count");
    if (degree_sum != 2 * edges_ + num_unpaired()) throw GraphError("half-edge accounting broken");
    for (std::uint32_t h = 0; h < 2 * edges_; ++h)
      if (partner(partner(h)) != h || partner(h) == h) throw GraphError("pairing is not an involution");
  }

  bool is_simple() const {
    std::vector<std::uint32_t> mark(n_, kNone);
    for (std::uint32_t v = 0; v < n_; ++v) {
      for (std::uint32_t h : incident_[v]) {
        const std::uint32_t p = partner(h);
        if (p == kNone) continue;
        const std::uint32_t u = owner_[p];
        if (u == v || mark[u] == v) return false;
        mark[u] = v;
      }
    }
    return true;
  }

  /// Text form: "n=<n>", one "u v" line per edge in edge-id order, then an
  /// "unpaired" line followed by one owner per line for unpaired half-edges.
  void write(std::ostream& out) const {
    out << "n=" << n_ << '\n';
    for (std::uint32_t e = 0; e < edges_; ++e) out << owner_[2 * e] << ' ' << owner_[2 * e + 1] << '\n';
    if (num_unpaired() > 0) {
      out << "unpaired\n";
      for (std::size_t h = 2 * edges_; h < owner_.size(); ++h) out << owner_[h] << '\n';
    }
  }

  static HalfEdgeGraph read(std::istream& in) {
    std::string line;
    std::size_t n = 0;
    bool have_header = false;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<std::uint32_t> unpaired;
    bool in_unpaired = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto fail = [&](const std::string& why) {
        return std::invalid_argument("edge list line " + std::to_string(lineno) + ": " + why);
      };
      if (!have_header) {
        if (line.rfind("n=", 0) != 0) throw fail("expected header n=<count>");
        std::istringstream hdr(line.substr(2));
        if (!(hdr >> n) || n == 0) throw fail("bad vertex count");
        have_header = true;
        continue;
      }
      if (line == "unpaired") {
        in_unpaired = true;
        continue;
      }
      std::istringstream row(line);
      std::uint64_t a = 0, b = 0;
      if (in_unpaired) {
        if (!(row >> a) || a >= n) throw fail("bad unpaired owner");
        unpaired.push_back(static_cast<std::uint32_t>(a));
      } else {
        if (!(row >> a >> b) || a >= n || b >= n) throw fail("bad edge");
        edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
      }
    }
    if (!have_header) throw std::invalid_argument("edge list: missing header");
    return HalfEdgeGraph(n, edges, unpaired);
  }

 private:
  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint32_t> owner_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::vector<std::uint32_t>> incident_;
  std::vector<std::uint32_t> activation_;
  std::vector<std::uint32_t> version_;
};

/// i.i.d. degrees from `dist`; if the sum is odd the last degree is redrawn until it is even.
inline std::vector<std::uint32_t> sample_degrees(std::size_t n, const DegreeDistribution& dist, Rng& rng) {
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  std::vector<std::uint32_t> degrees(n);
  std::uint64_t sum = 0;
  for (auto& d : degrees) {
    d = dist.sample(rng);
    sum += d;
  }
  if (sum % 2 == 1) {
    const bool fixable = dist.has_degree_parity(0) && dist.has_degree_parity(1);
    if (!fixable) throw std::invalid_argument("degree sum cannot be made even for this n and law");
    sum -= degrees.back();
    do {
      degrees.back() = dist.sample(rng);
    } while ((sum + degrees.back()) % 2 == 1);
  }
  return degrees;
}

/// Uniform perfect matching of the half-edges implied by `degrees`.
inline HalfEdgeGraph pair_uniformly(const std::vector<std::uint32_t>& degrees, Rng& rng) {
  std::vector<std::uint32_t> pool;
  for (std::uint32_t v = 0; v < degrees.size(); ++v) pool.insert(pool.end(), degrees[v], v);
  if (pool.size() % 2 == 1) throw std::invalid_argument("degree sum must be even");
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.index(i)]);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(pool.size() / 2);
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e] = {pool[2 * e], pool[2 * e + 1]};
  return HalfEdgeGraph(degrees.size(), edges);
}

/// Configuration model CM(n, D): multigraph with self-loops and multi-edges kept.
inline HalfEdgeGraph gen_config_model(std::size_t n, const DegreeDistribution& dist, std::uint64_t seed) {
  Rng rng(seed);
  const auto degrees = sample_degrees(n, dist, rng);
  return pair_uniformly(degrees, rng);
}

/// Erdos-Renyi G(n, mu/n) via geometric skipping over the n(n-1)/2 vertex pairs.
inline HalfEdgeGraph gen_er(std::size_t n, double mu, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be at least 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  const double p = mu / static_cast<double>(n);
  if (p > 1.0) throw std::invalid_argument("mu/n must not exceed 1");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  if (p > 0.0 && n > 1) {
    Rng rng(seed);
    edges.reserve(static_cast<std::size_t>(mu * static_cast<double>(n) / 2.0 * 1.1) + 16);
    const double log_q = std::log1p(-p);
    // Batagelj-Brandes: walk pairs (v, w) with w < v.
    std::int64_t v = 1, w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
      if (p >= 1.0) {
        ++w;
      } else {
        const double skip = std::floor(std::log1p(-rng.uniform()) / log_q);
        w += 1 + static_cast<std::int64_t>(std::min(skip, 9e15));
      }
      while (w >= v && v < nn) {
        w -= v;
        ++v;
      }
      if (v < nn) edges.emplace_back(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(v));
    }
  }
  return HalfEdgeGraph(n, edges);
}

}  // namespace evosim
