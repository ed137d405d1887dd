#pragma once

// Epidemics on a pre-built graph. Two drivers share one state machine:
//  * Markov mode samples the next event from category totals (Gillespie);
//  * bundle mode replays per-edge clocks from a CouplingBundle through an event heap,
//    which is what makes runs of different variants pathwise comparable.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "evosim/config.hpp"
#include "evosim/coupling.hpp"
#include "evosim/graph.hpp"
#include "evosim/indexed_set.hpp"
#include "evosim/rng.hpp"

namespace evosim {

namespace detail {

enum class EdgeState : std::uint8_t { Dormant, Active1, Active2, Dead };
enum class VertexState : std::uint8_t { S, I, R };

class StaticRun {
 public:
  StaticRun(HalfEdgeGraph graph, const EpidemicConfig& cfg) : g_(std::move(graph)), cfg_(cfg) {
    cfg_.validate();
    n_ = g_.n();
    m_ = g_.num_edges();
    vstate_.assign(n_, VertexState::S);
    estate_.assign(m_, EdgeState::Dormant);
    tau_.assign(m_, 0.0);
    a1_.reset(m_);
    a2_.reset(m_);
    infected_exp_.reset(n_);
    ab_ = cfg_.variant == Variant::ABAvoSI;
    avoid_ = rewires_infected_pairs(cfg_.variant);
    sir_ = !is_si(cfg_.variant) && (cfg_.duration == DurationMode::Fixed || cfg_.gamma > 0.0);
    if (ab_) {
      A_.assign(g_.num_half_edges(), kUnset);
      B_.assign(g_.num_half_edges(), -std::numeric_limits<double>::infinity());
    }
    budget_ = cfg_.event_budget ? cfg_.event_budget : 50ULL * (n_ + g_.num_half_edges());
    S_ = n_;
    for (std::uint32_t v = 0; v < n_; ++v) {
      const std::size_t d = g_.degree(v);
      if (d >= sk_.size()) sk_.resize(d + 1, 0);
      ++sk_[d];
      xs_ += d;
    }
  }

  Trajectory run_markov(std::uint64_t seed) {
    Rng rng(seed);
    bundle_ = nullptr;
    rng_ = &rng;
    const std::uint32_t seed_vertex = pick_seed([&] { return static_cast<std::uint32_t>(rng.index(n_)); });
    Recorder rec(cfg_.record);
    const auto snap = [this] { return snapshot(); };
    rec.start(snap);
    infect(seed_vertex, 0.0);
    const double lam = cfg_.lambda, rho = cfg_.rho;
    const double edge_rate = lam + rho;
    const double p_infect = edge_rate > 0.0 ? lam / edge_rate : 0.0;
    double t = 0.0;
    Outcome outcome = Outcome::Absorbed;
    for (;;) {
      const double total = edge_rate * static_cast<double>(a1_.size()) +
                           2.0 * edge_rate * static_cast<double>(a2_.size()) +
                           (exp_recovery() ? cfg_.gamma * static_cast<double>(infected_exp_.size()) : 0.0);
      const double next_fixed = fixed_queue_.empty() ? kInf : fixed_queue_.front().first;
      const double dt = total > 0.0 ? rng.exponential(total) : kInf;
      if (!(t + dt < kInf) && next_fixed == kInf) break;
      current_rate_ = total;
      if (++events_seen_ > budget_) {
        outcome = Outcome::BudgetExceeded;
        break;
      }
      if (next_fixed <= t + dt) {
        t = next_fixed;
        now_ = t;
        current_rate_ = kNaN;
        const std::uint32_t v = fixed_queue_.front().second;
        fixed_queue_.pop_front();
        rec.before(t, snap);
        recover(v);
        rec.after(t, snap);
        continue;
      }
      t += dt;
      now_ = t;
      rec.before(t, snap);
      double u = rng.uniform() * total;
      const double a1_mass = edge_rate * static_cast<double>(a1_.size());
      const double a2_mass = 2.0 * edge_rate * static_cast<double>(a2_.size());
      if (u < a1_mass && !a1_.empty()) {
        const std::uint32_t e = a1_.sample(rng);
        fire_active1(e, t, rng.uniform() < p_infect);
      } else if (u < a1_mass + a2_mass && !a2_.empty()) {
        const std::uint32_t e = a2_.sample(rng);
        fire_active2(e, t, rng.uniform() < p_infect);
      } else if (!infected_exp_.empty()) {
        recover(infected_exp_.sample(rng));
      } else if (!a1_.empty()) {  // rounding fallthrough
        fire_active1(a1_.sample(rng), t, rng.uniform() < p_infect);
      } else {
        fire_active2(a2_.sample(rng), t, rng.uniform() < p_infect);
      }
      rec.after(t, snap);
    }
    rng_ = nullptr;
    return finish(outcome, t, seed_vertex, rec);
  }

  Trajectory run_bundle(const CouplingBundle& bundle) {
    if (bundle.n() != n_) throw ConfigError("coupling bundle built for a different vertex count");
    if (bundle.lambda() != cfg_.lambda || bundle.rho() != cfg_.rho)
      throw ConfigError("coupling bundle rates differ from the configuration");
    bundle_ = &bundle;
    rng_ = nullptr;
    clocks_.assign(m_, EdgeClocks{});
    version_.assign(m_, 0);
    const std::uint32_t seed_vertex = pick_seed([&] { return bundle.seed_vertex(); });
    Recorder rec(cfg_.record);
    const auto snap = [this] { return snapshot(); };
    rec.start(snap);
    infect(seed_vertex, 0.0);
    double t = 0.0;
    Outcome outcome = Outcome::Absorbed;
    while (!heap_.empty()) {
      const HeapEvent ev = heap_.top();
      heap_.pop();
      if (ev.kind == HeapEvent::Edge && version_[ev.id] != ev.version) continue;
      if (++events_seen_ > budget_) {
        outcome = Outcome::BudgetExceeded;
        break;
      }
      t = ev.t;
      now_ = t;
      rec.before(t, snap);
      if (ev.kind == HeapEvent::Recovery) {
        recover(ev.id);
      } else {
        const EdgeClocks& c = clocks_[ev.id];
        const bool infection_first = c.T < c.R;
        if (estate_[ev.id] == EdgeState::Active1)
          fire_active1(ev.id, t, infection_first);
        else
          fire_active2(ev.id, t, infection_first);
      }
      rec.after(t, snap);
    }
    bundle_ = nullptr;
    return finish(outcome, t, seed_vertex, rec);
  }

  const HalfEdgeGraph& graph() const { return g_; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  struct HeapEvent {
    enum Kind : std::uint8_t { Recovery = 0, Edge = 1 };
    double t;
    std::uint32_t id;
    std::uint32_t version;
    Kind kind;
    bool operator>(const HeapEvent& o) const {
      if (t != o.t) return t > o.t;
      if (kind != o.kind) return kind > o.kind;
      return id > o.id;
    }
  };

  void emit(EventKind kind, std::uint32_t subject, std::uint32_t vertex) {
    if (!observer_ || !*observer_) return;
    observer_->operator()(EventInfo{now_, kind, subject, vertex, current_rate_});
  }

  bool exp_recovery() const { return sir_ && cfg_.duration == DurationMode::Exponential; }

  template <class Draw>
  std::uint32_t pick_seed(Draw draw) {
    if (cfg_.seed_vertex) {
      if (*cfg_.seed_vertex >= n_) throw ConfigError("seed vertex out of range");
      return *cfg_.seed_vertex;
    }
    return draw();
  }

  Sample snapshot() const {
    Sample s;
    s.S = S_;
    s.I = I_;
    s.R = R_;
    s.X = 2 * (a1_.size() + a2_.size());
    s.X_I = a1_.size() + 2 * a2_.size();
    s.X_S = xs_;
    const std::size_t kmax = cfg_.record.k_max;
    s.S_k.assign(kmax + 1, 0);
    for (std::size_t k = 0; k <= kmax && k < sk_.size(); ++k) s.S_k[k] = sk_[k];
    return s;
  }

  void susceptible_degree_change(std::uint32_t v, int delta) {
    const std::size_t d = g_.degree(v);  // degree after the change
    const std::size_t before = static_cast<std::size_t>(static_cast<long long>(d) - delta);
    if (d >= sk_.size()) sk_.resize(d + 1, 0);
    --sk_[before];
    ++sk_[d];
    xs_ = xs_ + d - before;
  }

  // ---- scheduling ----

  void activate(std::uint32_t e, double t, EdgeState to) {
    estate_[e] = to;
    (to == EdgeState::Active1 ? a1_ : a2_).insert(e);
    if (to == EdgeState::Active1) a2_.erase(e); else a1_.erase(e);
    tau_[e] = t;
    const std::uint32_t ell = g_.advance_activation(e);
    if (bundle_) {
      clocks_[e] = bundle_->clocks(e, ell);
      const double s = std::min(clocks_[e].T, clocks_[e].R);
      schedule(e, to == EdgeState::Active1 ? t + s : t + s / 2.0);
    }
  }

  void retire(std::uint32_t e, EdgeState to) {
    estate_[e] = to;
    a1_.erase(e);
    a2_.erase(e);
    if (bundle_) ++version_[e];
  }

  void schedule(std::uint32_t e, double when) {
    ++version_[e];
    if (when < kInf) heap_.push({when, e, version_[e], HeapEvent::Edge});
  }

  /// Active1 -> Active2 when the susceptible end gets infected through another edge.
  void promote(std::uint32_t e, double t) {
    estate_[e] = EdgeState::Active2;
    a1_.erase(e);
    a2_.insert(e);
    if (bundle_) {
      const EdgeClocks& c = clocks_[e];
      const double w = t - tau_[e];
      double tp = 0.0, rp = 0.0;
      if (c.T > w && c.R > w) {
        std::tie(tp, rp) = halved_residual(c.T, c.R, w);
      } else {  // coincident event times after rounding
        tp = std::max(c.T - w, 0.0) / 2.0;
        rp = std::max(c.R - w, 0.0) / 2.0;
      }
      schedule(e, t + std::min(tp, rp));
    }
  }

  // ---- state transitions ----

  void infect(std::uint32_t v, double t) {
    assert(vstate_[v] == VertexState::S);
    vstate_[v] = VertexState::I;
    --S_;
    ++I_;
    const std::size_t d = g_.degree(v);
    --sk_[d];
    xs_ -= d;
    infected_list_.push_back(v);
    if (ab_)
      for (std::uint32_t h : g_.half_edges(v))
        if (std::isnan(A_[h])) A_[h] = t;

    for (std::uint32_t h : g_.half_edges(v)) {
      if (!g_.is_paired(h)) continue;
      const std::uint32_t e = HalfEdgeGraph::edge_of(h);
      const std::uint32_t u = g_.owner(h ^ 1u);
      if (u == v) {
        if (h & 1u) continue;  // visit a self-loop once
        if (estate_[e] == EdgeState::Dormant) {
          if (avoid_)
            activate(e, t, EdgeState::Active2);
          else
            retire(e, EdgeState::Dead);
        }
        continue;
      }
      switch (vstate_[u]) {
        case VertexState::S:
          if (estate_[e] == EdgeState::Dormant) activate(e, t, EdgeState::Active1);
          break;
        case VertexState::I:
          if (estate_[e] == EdgeState::Active1) {
            if (avoid_)
              promote(e, t);
            else
              retire(e, EdgeState::Dead);
          }
          break;
        case VertexState::R: break;
      }
    }

    if (sir_) {
      if (cfg_.duration == DurationMode::Fixed) {
        if (bundle_)
          heap_.push({t + 1.0, v, 0, HeapEvent::Recovery});
        else
          fixed_queue_.emplace_back(t + 1.0, v);
      } else if (bundle_) {
        const double d_rec = bundle_->recovery_time(v, cfg_.gamma);
        if (d_rec < kInf) heap_.push({t + d_rec, v, 0, HeapEvent::Recovery});
      } else {
        infected_exp_.insert(v);
      }
    }
  }

  void recover(std::uint32_t v) {
    if (vstate_[v] != VertexState::I) return;
    vstate_[v] = VertexState::R;
    --I_;
    ++R_;
    ++events_.recovery;
    emit(EventKind::Recovery, v, v);
    infected_exp_.erase(v);
    for (std::uint32_t h : g_.half_edges(v)) {
      if (!g_.is_paired(h)) continue;
      const std::uint32_t e = HalfEdgeGraph::edge_of(h);
      if (estate_[e] == EdgeState::Active1 || estate_[e] == EdgeState::Active2) retire(e, EdgeState::Dead);
    }
  }

  /// Side (0/1) of edge e whose owner is infected; for an Active1 edge exactly one is.
  int infected_side(std::uint32_t e) const {
    return vstate_[g_.owner(2 * e)] == VertexState::I ? 0 : 1;
  }

  std::uint32_t rewire_target(std::uint32_t e) {
    if (bundle_) return clocks_[e].U;
    return static_cast<std::uint32_t>(rng_->index(n_));
  }

  void fire_active1(std::uint32_t e, double t, bool infection) {
    const int si = infected_side(e);
    const std::uint32_t hx = 2 * e + static_cast<std::uint32_t>(si);
    const std::uint32_t hy = hx ^ 1u;
    const std::uint32_t y = g_.owner(hy);
    if (infection) {
      retire(e, EdgeState::Dead);
      if (ab_ && !(A_[hx] > B_[hy])) {
        ++events_.blocked;
        emit(EventKind::Blocked, e, y);
        return;
      }
      assert(!ab_ || A_[hx] > B_[hy]);
      ++events_.infection;
      emit(EventKind::Infection, e, y);
      infect(y, t);
      return;
    }
    const double keep_prob = cfg_.effective_rewire_prob();
    bool rewire = keep_prob >= 1.0;
    if (keep_prob > 0.0 && keep_prob < 1.0)
      rewire = (bundle_ ? clocks_[e].omega_u : rng_->uniform()) < keep_prob;
    if (!rewire) {
      ++events_.drop;
      emit(EventKind::Drop, e, y);
      retire(e, EdgeState::Dead);
      return;
    }
    const std::uint32_t target = rewire_target(e);
    move(hx, target, t);
    ++events_.rewiring;
    emit(EventKind::Rewiring, e, target);
    switch (vstate_[target]) {
      case VertexState::S: retire(e, EdgeState::Dormant); break;
      case VertexState::I: activate(e, t, EdgeState::Active1); break;
      case VertexState::R: retire(e, EdgeState::Dead); break;
    }
  }

  void fire_active2(std::uint32_t e, double t, bool infection) {
    if (infection) {
      ++events_.stabilized;
      emit(EventKind::Stabilized, e, g_.owner(2 * e));
      retire(e, EdgeState::Dead);
      return;
    }
    const std::uint32_t stay_side = bundle_ ? clocks_[e].V : static_cast<std::uint32_t>(rng_->bits() & 1u);
    const std::uint32_t moving = 2 * e + (1u - stay_side);
    const std::uint32_t target = rewire_target(e);
    move(moving, target, t);
    ++events_.rewiring;
    emit(EventKind::Rewiring, e, target);
    if (vstate_[target] == VertexState::S)
      activate(e, t, EdgeState::Active1);
    else
      activate(e, t, EdgeState::Active2);
  }

  void move(std::uint32_t h, std::uint32_t target, double t) {
    const std::uint32_t from = g_.owner(h);
    g_.move_half_edge(h, target);
    if (ab_) B_[h] = t;
    if (from != target) {
      if (vstate_[from] == VertexState::S) susceptible_degree_change(from, -1);
      if (vstate_[target] == VertexState::S) susceptible_degree_change(target, +1);
    }
  }

  Trajectory finish(Outcome outcome, double t, std::uint32_t seed_vertex, Recorder& rec) {
    Trajectory out;
    out.outcome = outcome;
    out.final_size = I_ + R_;
    out.seed_vertex = seed_vertex;
    out.end_time = t;
    out.events = events_;
    out.samples = rec.finish(t, [this] { return snapshot(); });
    out.infected = infected_list_;
    std::sort(out.infected.begin(), out.infected.end());
    return out;
  }

  HalfEdgeGraph g_;
  EpidemicConfig cfg_;
  std::size_t n_ = 0, m_ = 0;
  bool ab_ = false, avoid_ = false, sir_ = false;
  std::vector<VertexState> vstate_;
  std::vector<EdgeState> estate_;
  std::vector<double> tau_;
  std::vector<double> A_, B_;
  IndexedSet a1_, a2_, infected_exp_;
  std::deque<std::pair<double, std::uint32_t>> fixed_queue_;
  std::vector<std::uint64_t> sk_;
  std::uint64_t xs_ = 0;
  std::uint64_t S_ = 0, I_ = 0, R_ = 0;
  EventCounts events_;
  std::uint64_t events_seen_ = 0, budget_ = 0;
  std::vector<std::uint32_t> infected_list_;
  // bundle mode
  const CouplingBundle* bundle_ = nullptr;
  std::vector<EdgeClocks> clocks_;
  std::vector<std::uint32_t> version_;
  std::priority_queue<HeapEvent, std::vector<HeapEvent>, std::greater<>> heap_;
  // Markov mode
  Rng* rng_ = nullptr;
  double current_rate_ = kNaN;
  double now_ = 0.0;

 public:
  const EventObserver* observer_ = nullptr;
};

}  // namespace detail

/// Gillespie-style run driven by a single seeded generator.
/// `observer`, when given, sees every event in order.
inline Trajectory run_static(const HalfEdgeGraph& graph, const EpidemicConfig& cfg, std::uint64_t seed,
                             const EventObserver& observer = {}) {
  detail::StaticRun run(graph, cfg);
  run.observer_ = &observer;
  return run.run_markov(seed);
}

/// Run whose every clock, rewiring target and coin is read from `bundle`.
inline Trajectory run_static(const HalfEdgeGraph& graph, const EpidemicConfig& cfg, const CouplingBundle& bundle,
                             const EventObserver& observer = {}) {
  detail::StaticRun run(graph, cfg);
  run.observer_ = &observer;
  return run.run_bundle(bundle);
}

}  // namespace evosim
