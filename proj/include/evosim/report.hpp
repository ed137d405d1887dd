#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evosim/config.hpp"

namespace evosim {

struct RunRecord {
  Variant variant = Variant::EvoSI;
  std::size_t n = 0;
  double lambda = 0, rho = 0, gamma = 0;
  std::uint64_t seed = 0;
  std::uint64_t final_size = 0;
  EventCounts events;
  double wallclock_ms = 0;
  Outcome outcome = Outcome::Absorbed;
};

inline nlohmann::json to_json(const EventCounts& e) {
  return {{"infection", e.infection}, {"rewiring", e.rewiring},   {"drop", e.drop},
          {"recovery", e.recovery},   {"blocked", e.blocked},     {"stabilized", e.stabilized}};
}

inline nlohmann::json to_json(const RunRecord& r) {
  return {{"variant", std::string(to_string(r.variant))},
          {"n", r.n},
          {"lambda", r.lambda},
          {"rho", r.rho},
          {"gamma", r.gamma},
          {"seed", r.seed},
          {"final_size", r.final_size},
          {"events", to_json(r.events)},
          {"wallclock_ms", r.wallclock_ms},
          {"outcome", std::string(to_string(r.outcome))}};
}

/// One compact JSON object per line.
inline void write_jsonl(std::ostream& os, const RunRecord& r) { os << to_json(r).dump() << '\n'; }

inline std::string trajectory_csv_header(std::size_t k_max) {
  std::string h = "t,S,I,R,X,X_I";
  for (std::size_t k = 0; k <= k_max; ++k) h += ",S_" + std::to_string(k);
  return h;
}

/// Samples as CSV rows. S_k columns beyond what a sample recorded are written as 0.
inline void write_trajectory_csv(std::ostream& os, const std::vector<Sample>& samples, std::size_t k_max) {
  os << trajectory_csv_header(k_max) << '\n';
  const auto old_precision = os.precision(17);
  for (const Sample& s : samples) {
    os << s.t << ',' << s.S << ',' << s.I << ',' << s.R << ',' << s.X << ',' << s.X_I;
    for (std::size_t k = 0; k <= k_max; ++k) os << ',' << (k < s.S_k.size() ? s.S_k[k] : 0);
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace evosim
