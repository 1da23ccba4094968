#include "ietrial/analytic_power.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ietrial/error.hpp"
#include "ietrial/normal.hpp"

namespace ietrial {

double noncentrality(const TwoByTwoTable& table) {
  return std::fabs(pooled_z_test(table).z);
}

double power_from_z(double z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1)");
  }
  return normal_cdf(z - normal_quantile(1.0 - alpha / 2.0));
}

double z_ratio(const TrialScenario& s) {
  const ConditionalRates rates = solve_rates(s);
  if (s.p_m == 0.0) {
    throw InfeasibleScenario("z_ratio undefined: no ever-positives (p_m = 0)");
  }
  const double rd = s.p0 * (1.0 - s.rr);
  if (rd == 0.0) {
    throw InfeasibleScenario("z_ratio undefined: overall RD is 0 (rr = 1)");
  }
  const double rd_neg = rates.never_positive * (1.0 - s.rr_neg);

  const TrialDecomposition d = expected_decomposition(s);
  const TwoByTwoTable overall = decomposition_sum(d);
  const double pm_given_event = d.ever.events() / overall.events();
  const double pm_given_nonevent =
      (d.ever.total() - d.ever.events()) / (overall.total() - overall.events());

  const double brace = 1.0 - rd_neg / rd * (1.0 - s.p_m);
  return brace * std::sqrt(s.p_m / (pm_given_event * pm_given_nonevent));
}

PowerResult analytic_power(const TrialScenario& s, double alpha) {
  PowerResult out;
  out.alpha = alpha;
  out.rates = solve_rates(s);
  out.z_ratio = z_ratio(s);  // rejects RD = 0 before any table degenerates
  const TrialDecomposition d = expected_decomposition(s);
  out.z_standard = pooled_z_test(decomposition_sum(d)).z;
  out.z_pos = pooled_z_test(d.ever).z;
  out.power_standard = power_from_z(std::fabs(out.z_standard), alpha);
  out.power_pos = power_from_z(std::fabs(out.z_pos), alpha);
  return out;
}

namespace {

double power_at(TrialScenario s, std::int64_t per_arm, Analysis analysis,
                double alpha) {
  s.total_n = 2 * per_arm;
  const TrialDecomposition d = expected_decomposition(s);
  const TwoByTwoTable& table =
      analysis == Analysis::standard ? decomposition_sum(d) : d.ever;
  return power_from_z(noncentrality(table), alpha);
}

}  // namespace

std::int64_t required_n_per_arm(const TrialScenario& s, Analysis analysis,
                                double target_power, double alpha) {
  if (s.control_fraction != 0.5) {
    throw InfeasibleScenario("sample-size search assumes equal arms");
  }
  if (!(target_power > alpha / 2.0 && target_power < 1.0)) {
    throw std::domain_error("target power must lie in (alpha/2, 1)");
  }
  std::int64_t lo = 1;
  std::int64_t hi = 2;
  constexpr std::int64_t kMaxPerArm = 1'000'000'000;
  while (power_at(s, hi, analysis, alpha) < target_power) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxPerArm) {
      throw InfeasibleScenario("target power unreachable below 1e9 per arm");
    }
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (power_at(s, mid, analysis, alpha) >= target_power) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<PowerCurvePoint> power_curve(const TrialScenario& base,
                                         std::span<const double> rr_pos_grid,
                                         std::span<const double> p_m_grid,
                                         std::span<const double> rr_neg_set,
                                         double alpha) {
  std::vector<PowerCurvePoint> out;
  out.reserve(rr_pos_grid.size() * p_m_grid.size() * rr_neg_set.size());
  for (double rr_neg : rr_neg_set) {
    for (double p_m : p_m_grid) {
      for (double rr_pos : rr_pos_grid) {
        PowerCurvePoint pt;
        pt.index = out.size();
        pt.rr_pos = rr_pos;
        pt.p_m = p_m;
        pt.rr_neg = rr_neg;
        TrialScenario s = base;
        s.rr_pos = rr_pos;
        s.p_m = p_m;
        s.rr_neg = rr_neg;
        try {
          pt.power_pos = power_from_z(noncentrality(expected_decomposition(s).ever), alpha);
        } catch (const Error& e) {
          pt.feasible = false;
          pt.power_pos = std::numeric_limits<double>::quiet_NaN();
          pt.note = e.what();
        }
        out.push_back(std::move(pt));
      }
    }
  }
  return out;
}

}  // namespace ietrial
