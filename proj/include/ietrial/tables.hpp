#pragma once

#include <string_view>

namespace ietrial {

/// Outcome-by-arm counts. Cells are reals so that inverse-probability
/// weighted and ratio-corrected tables share the same estimators.
///
///            screen              control
///   D+   events_screen      events_control
///   D-   nonevents_screen   nonevents_control
struct TwoByTwoTable {
  double events_screen = 0.0;
  double nonevents_screen = 0.0;
  double events_control = 0.0;
  double nonevents_control = 0.0;

  double n_screen() const { return events_screen + nonevents_screen; }
  double n_control() const { return events_control + nonevents_control; }
  double total() const { return n_screen() + n_control(); }
  double events() const { return events_screen + events_control; }

  bool is_zero() const;

  /// Throws EstimationError if any cell is negative or non-finite.
  void validate() const;

  TwoByTwoTable& operator+=(const TwoByTwoTable& other);
  friend TwoByTwoTable operator+(TwoByTwoTable lhs, const TwoByTwoTable& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend bool operator==(const TwoByTwoTable&, const TwoByTwoTable&) = default;
};

struct RiskRates {
  double screen = 0.0;
  double control = 0.0;
};

RiskRates risk_rates(const TwoByTwoTable& table);

/// p_screen / p_control. Throws EstimationError when the control arm has
/// no events.
double relative_risk(const TwoByTwoTable& table);

/// p_control - p_screen (positive when screening lowers the outcome rate).
double risk_difference(const TwoByTwoTable& table);

enum class Estimand { rr, rd, rr_pos, rd_pos, rr_neg, rd_neg };

std::string_view to_string(Estimand e);
bool is_ratio(Estimand e);

struct EstimateResult {
  Estimand label = Estimand::rd;
  double point = 0.0;
  double pooled_rate = 0.0;
  double se_null = 0.0;
  double z = 0.0;
  double p_two_sided = 1.0;
};

/// Two-proportion Z test with the variance pooled under the null:
///   se^2 = pi (1 - pi) (1/n_screen + 1/n_control) + extra_control_variance
/// z = risk_difference / se. `extra_control_variance` carries any design
/// variance of the control-arm rate (sampling weights, retest fractions);
/// it is zero for a plain table.
///
/// Throws DegenerateTable if the pooled rate is 0 or 1, and
/// EstimationError for an empty arm or, for ratio labels, zero control
/// events.
EstimateResult pooled_z_test(const TwoByTwoTable& table,
                             Estimand label = Estimand::rd,
                             double extra_control_variance = 0.0);

/// Ever-positive, never-positive and unknown-positivity tables. Their
/// cell-wise sum is the overall trial table.
struct TrialDecomposition {
  TwoByTwoTable ever;
  TwoByTwoTable never;
  TwoByTwoTable unknown;

  friend bool operator==(const TrialDecomposition&,
                         const TrialDecomposition&) = default;
};

TwoByTwoTable decomposition_sum(const TrialDecomposition& d);

}  // namespace ietrial
