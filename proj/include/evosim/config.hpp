#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evosim {

enum class Variant { DelSI, EvoSI, AvoSI, ABAvoSI, DelSIR, EvoSIR, SIROmega };
enum class DurationMode { Exponential, Fixed };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::DelSI: return "delSI";
    case Variant::EvoSI: return "evoSI";
    case Variant::AvoSI: return "avoSI";
    case Variant::ABAvoSI: return "abAvoSI";
    case Variant::DelSIR: return "delSIR";
    case Variant::EvoSIR: return "evoSIR";
    case Variant::SIROmega: return "sirOmega";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::DelSI, Variant::EvoSI, Variant::AvoSI, Variant::ABAvoSI, Variant::DelSIR,
                    Variant::EvoSIR, Variant::SIROmega})
    if (s == to_string(v)) return v;
  if (s == "abavoSI" || s == "ab-avoSI" || s == "AB-avoSI") return Variant::ABAvoSI;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

inline bool is_si(Variant v) {
  return v == Variant::DelSI || v == Variant::EvoSI || v == Variant::AvoSI || v == Variant::ABAvoSI;
}

/// Whether unstable I-I edges keep rewiring (the avoiding variants).
inline bool rewires_infected_pairs(Variant v) { return v == Variant::AvoSI || v == Variant::ABAvoSI; }

struct RecordPolicy {
  enum class Mode { None, Adaptive, Grid };
  Mode mode = Mode::None;
  double grid_dt = 0.01;
  double horizon = std::numeric_limits<double>::infinity();
  std::size_t k_max = 0;  // S_k columns recorded for k = 0..k_max (none when Mode::None)
  std::size_t adaptive_full = 10'000;
  std::size_t adaptive_cap = 2048;
};

struct EpidemicConfig {
  Variant variant = Variant::EvoSI;
  double lambda = 1.0;
  double rho = 0.0;
  double gamma = 0.0;
  double rewire_prob = std::numeric_limits<double>::quiet_NaN();  // SIR-omega only
  DurationMode duration = DurationMode::Exponential;
  std::optional<std::uint32_t> seed_vertex;  // uniform when absent
  double eta = 0.01;
  RecordPolicy record;
  bool time_changed = false;     // dynamic construction only
  std::uint64_t event_budget = 0;  // 0: 50 (n + half-edges)

  /// Probability that a rho-event rewires rather than drops the edge.
  double effective_rewire_prob() const {
    switch (variant) {
      case Variant::DelSI:
      case Variant::DelSIR: return 0.0;
      case Variant::SIROmega: return rewire_prob;
      default: return 1.0;
    }
  }

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be finite and >= 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
    if (is_si(variant)) {
      if (gamma != 0.0) throw ConfigError(std::string(to_string(variant)) + " is an SI model: gamma must be 0");
      if (duration == DurationMode::Fixed)
        throw ConfigError("fixed infection duration applies to SIR variants only");
    }
    if (variant == Variant::SIROmega) {
      if (!(rewire_prob >= 0.0 && rewire_prob <= 1.0)) throw ConfigError("sirOmega needs rewire_prob in [0, 1]");
    }
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
    if (record.mode == RecordPolicy::Mode::Grid && !(record.grid_dt > 0.0))
      throw ConfigError("grid sampling needs a positive step");
  }
};

struct EventCounts {
  std::uint64_t infection = 0;
  std::uint64_t rewiring = 0;
  std::uint64_t drop = 0;
  std::uint64_t recovery = 0;
  std::uint64_t blocked = 0;     // AB attempts that did not transmit
  std::uint64_t stabilized = 0;  // I-I edges closed by an attempt
  std::uint64_t total() const { return infection + rewiring + drop + recovery + blocked + stabilized; }
  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

enum class EventKind : std::uint8_t { Infection, Rewiring, Drop, Recovery, Blocked, Stabilized };

struct EventInfo {
  double t = 0;
  EventKind kind = EventKind::Infection;
  std::uint32_t subject = 0;  // edge id, or the vertex for recoveries
  std::uint32_t vertex = 0;   // newly infected vertex, rewiring target or recovered vertex
  double total_rate = std::numeric_limits<double>::quiet_NaN();  // Markov mode: rate the wait was drawn from
};

using EventObserver = std::function<void(const EventInfo&)>;

struct Sample {
  double t = 0;
  std::uint64_t S = 0, I = 0, R = 0;
  std::uint64_t X = 0;    // free half-edges (dynamic) or half-edges of active edges (static)
  std::uint64_t X_I = 0;  // infected free / infected active half-edges
  std::uint64_t X_S = 0;  // half-edges attached to susceptible vertices (free ones in dynamic mode)
  std::vector<std::uint64_t> S_k;
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Outcome { Absorbed, BudgetExceeded };

inline std::string_view to_string(Outcome o) {
  return o == Outcome::Absorbed ? "absorbed" : "budget-exceeded";
}

struct Trajectory {
  Outcome outcome = Outcome::Absorbed;
  std::uint64_t final_size = 0;  // vertices ever infected
  std::uint32_t seed_vertex = 0;
  double end_time = 0;
  EventCounts events;
  std::vector<Sample> samples;
  std::vector<std::uint32_t> infected;  // sorted ids of vertices ever infected
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Collects samples according to a RecordPolicy. Engines call `before(t, snap)` before
/// applying an event at time t and `after(t, snap)` once it has been applied.
class Recorder {
 public:
  explicit Recorder(const RecordPolicy& policy) : policy_(policy) {}

  template <class Snap>
  void start(Snap&& snap) {
    if (policy_.mode == RecordPolicy::Mode::None) return;
    push(0.0, snap);
    next_grid_ = policy_.grid_dt;
  }

  template <class Snap>
  void before(double t, Snap&& snap) {
    if (policy_.mode != RecordPolicy::Mode::Grid) return;
    while (next_grid_ < t && next_grid_ <= policy_.horizon + 1e-9 * policy_.grid_dt) {
      push(next_grid_, snap);
      ++grid_index_;
      next_grid_ = static_cast<double>(grid_index_ + 1) * policy_.grid_dt;
    }
  }

  template <class Snap>
  void after(double t, Snap&& snap) {
    if (policy_.mode != RecordPolicy::Mode::Adaptive) return;
    ++event_index_;
    if (event_index_ % stride_ != 0 || t > policy_.horizon) return;
    push(t, snap);
    if (stride_ == 1 && samples_.size() > policy_.adaptive_full) {
      while ((event_index_ / stride_) + 1 > policy_.adaptive_cap) stride_ *= 2;
      thin();
    } else if (stride_ > 1 && samples_.size() > policy_.adaptive_cap) {
      stride_ *= 2;
      thin();
    }
  }

  template <class Snap>
  std::vector<Sample> finish(double t_end, Snap&& snap) {
    if (policy_.mode == RecordPolicy::Mode::None) return {};
    if (t_end <= policy_.horizon && (samples_.empty() || samples_.back().t != t_end)) push(t_end, snap);
    return std::move(samples_);
  }

 private:
  template <class Snap>
  void push(double t, Snap& snap) {
    Sample s = snap();
    s.t = t;
    samples_.push_back(std::move(s));
    indices_.push_back(event_index_);
  }

  void thin() {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (indices_[i] % stride_ != 0) continue;
      samples_[keep] = std::move(samples_[i]);
      indices_[keep] = indices_[i];
      ++keep;
    }
    samples_.resize(keep);
    indices_.resize(keep);
  }

  RecordPolicy policy_;
  std::vector<Sample> samples_;
  std::vector<std::uint64_t> indices_;
  std::uint64_t event_index_ = 0;
  std::uint64_t stride_ = 1;
  std::uint64_t grid_index_ = 0;
  double next_grid_ = 0;
};

}  // namespace evosim
