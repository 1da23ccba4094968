#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ietrial/error.hpp"
#include "ietrial/scenario.hpp"

// Feasible scenarios with both conditional rates strictly inside (0, 1),
// equal arms, and a non-null overall effect.
inline std::vector<ietrial::TrialScenario> random_feasible_scenarios(std::size_t count,
                                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p0(0.005, 0.2), rr(0.5, 1.3), p_m(0.01, 0.95),
      rr_neg(0.8, 1.25), rr_pos(0.3, 1.6);
  std::vector<ietrial::TrialScenario> out;
  while (out.size() < count) {
    ietrial::TrialScenario s;
    s.total_n = 100000;
    s.p0 = p0(rng);
    s.rr = rr(rng);
    s.p_m = p_m(rng);
    s.rr_neg = rr_neg(rng);
    s.rr_pos = rr_pos(rng);
    if (std::fabs(s.rr - 1.0) < 1e-3 || std::fabs(s.rr_neg - s.rr_pos) < 1e-2) continue;
    try {
      const ietrial::ConditionalRates r = ietrial::solve_rates(s);
      if (r.ever_positive < 1e-6 || r.never_positive < 1e-6) continue;
    } catch (const ietrial::InfeasibleScenario&) {
      continue;
    }
    out.push_back(s);
  }
  return out;
}
