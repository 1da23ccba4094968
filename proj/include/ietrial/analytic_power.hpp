#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ietrial/scenario.hpp"
#include "ietrial/tables.hpp"

namespace ietrial {

/// Expected Z statistic |RD| / se under the alternative, with the null
/// (pooled) standard error. Meant for expected tables.
double noncentrality(const TwoByTwoTable& table);

/// Two-sided power Phi(z - Phi^-1(1 - alpha/2)). The wrong-sign rejection
/// region is ignored.
double power_from_z(double z, double alpha);

/// Ratio of the ever-positive to the overall noncentrality:
///   {1 - RD_neg / RD * P(M-)} * sqrt(P(M+) / (P(M+|D+) P(M+|D-)))
/// Signed: negative when RD_pos and RD have opposite signs.
/// Throws InfeasibleScenario when RD = 0.
double z_ratio(const TrialScenario& s);

struct PowerResult {
  double z_standard = 0.0;  // signed RD / se on the overall expected table
  double z_pos = 0.0;       // signed RD_pos / se on the ever-positive table
  double z_ratio = 0.0;
  double power_standard = 0.0;
  double power_pos = 0.0;
  double alpha = 0.05;
  ConditionalRates rates;
};

PowerResult analytic_power(const TrialScenario& s, double alpha);

enum class Analysis { standard, intended_effect };

/// Smallest per-arm size (equal arms) reaching `target_power`, by bisection
/// on the total sample size.
std::int64_t required_n_per_arm(const TrialScenario& s, Analysis analysis,
                                double target_power, double alpha);

struct PowerCurvePoint {
  std::size_t index = 0;
  double rr_pos = 0.0;
  double p_m = 0.0;
  double rr_neg = 0.0;
  bool feasible = true;
  double power_pos = 0.0;  // NaN when infeasible
  std::string note;        // reason when infeasible
};

/// Power of the ever-positive analysis over the grid
/// rr_neg_set x p_m_grid x rr_pos_grid (rr_pos varies fastest). Infeasible
/// points are kept and flagged.
std::vector<PowerCurvePoint> power_curve(const TrialScenario& base,
                                         std::span<const double> rr_pos_grid,
                                         std::span<const double> p_m_grid,
                                         std::span<const double> rr_neg_set,
                                         double alpha);

}  // namespace ietrial
