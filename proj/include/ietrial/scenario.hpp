#pragma once

#include <cstdint>

#include "ietrial/tables.hpp"

namespace ietrial {

/// The seven generative parameters of a screening trial.
struct TrialScenario {
  std::int64_t total_n = 100000;
  double control_fraction = 0.5;
  double p0 = 0.02;      // control-arm outcome rate P0(D+)
  double rr = 0.9;       // overall relative risk
  double p_m = 0.05;     // probability of ever testing positive
  double rr_neg = 1.0;   // relative risk among never-positives
  double rr_pos = 13.0 / 15.0;  // relative risk among ever-positives

  /// Arm sizes as reals (expected-table arithmetic).
  double n_control_real() const;
  double n_screen_real() const;

  /// Integer arm sizes used by the simulator: the control arm is
  /// round(total_n * control_fraction).
  std::int64_t n_control() const;
  std::int64_t n_screen() const;

  /// Range checks on the raw parameters; throws InfeasibleScenario.
  void validate() const;

  friend bool operator==(const TrialScenario&, const TrialScenario&) = default;
};

/// Control-arm outcome rates conditional on ever-positivity. The
/// screen-arm rates are rr_pos * ever_positive and rr_neg * never_positive.
struct ConditionalRates {
  double ever_positive = 0.0;   // P0(D+|M+)
  double never_positive = 0.0;  // P0(D+|M-)
};

/// Solves
///   p_m x + (1 - p_m) y = p0
///   p_m rr_pos x + (1 - p_m) rr_neg y = rr p0
/// for (x, y). Rates within 1e-12 of [0, 1] are clamped; anything further
/// out, including the screen-arm rates, raises InfeasibleScenario.
ConditionalRates solve_rates(const TrialScenario& s);

/// Expected (real-valued) cell counts of the ever/never tables implied by
/// the scenario. The unknown table is zero.
TrialDecomposition expected_decomposition(const TrialScenario& s);

/// Closed form of the pooled P(D+|M+) for equal arms:
///   0.5 (p0 / p_m) (1 + rr_pos) (rr_neg - rr) / (rr_neg - rr_pos)
/// Requires control_fraction == 0.5 and rr_neg != rr_pos.
double pooled_everpos_rate(const TrialScenario& s);

}  // namespace ietrial
