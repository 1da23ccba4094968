#pragma once

#include <span>
#include <string>
#include <vector>

#include "ietrial/rng.hpp"
#include "ietrial/tables.hpp"

namespace ietrial {

// ---------------------------------------------------------------------------
// Shared vocabulary
// ---------------------------------------------------------------------------

/// A pair of counts split by outcome (D+, D-).
struct OutcomeCounts {
  double events = 0.0;
  double nonevents = 0.0;
};

/// Estimate of a control-arm column (events, non-events) together with the
/// design variance each cell carries beyond ordinary binomial sampling of
/// the trial itself (specimen subsampling, retest fractions, signal loss).
/// Cells of a fully observed column have zero design variance.
struct ControlColumn {
  double events = 0.0;
  double nonevents = 0.0;
  double events_var = 0.0;
  double nonevents_var = 0.0;

  double total() const { return events + nonevents; }
  double rate() const { return events / total(); }
};

/// Delta-method variance of events / (events + nonevents) from the design
/// variances of the two (independent) cells.
double column_rate_variance(const ControlColumn& column);

/// The complementary column: per-outcome totals minus `column`. The design
/// variance carries over unchanged because the totals are observed.
ControlColumn complement_column(const OutcomeCounts& totals,
                                const ControlColumn& column);

/// Pooled Z test of a screen column against an estimated control column,
/// with the control column's design variance added to the null variance.
EstimateResult column_test(const OutcomeCounts& screen,
                           const ControlColumn& control, Estimand label);

// ---------------------------------------------------------------------------
// Stratified specimen subsampling with inverse-probability weights
// ---------------------------------------------------------------------------

struct Stratum {
  std::string label;
  double fraction = 1.0;
};

/// Ordered strata of the control arm, each testing a fraction of its
/// members. Stratum 0 is always the control-arm events (D+).
class SamplingPlan {
 public:
  explicit SamplingPlan(std::vector<Stratum> strata);

  /// The two-stratum plan used throughout: all events in one stratum,
  /// all non-events in the other.
  static SamplingPlan events_and_nonevents(double f_events, double f_nonevents);

  std::span<const Stratum> strata() const { return strata_; }
  double fraction(std::size_t i) const { return strata_.at(i).fraction; }
  std::size_t size() const { return strata_.size(); }

 private:
  std::vector<Stratum> strata_;
};

struct StratumCount {
  double sampled_n = 0.0;
  double observed_positive = 0.0;  // for stratum 0 this is D1
};

struct IpwEstimate {
  double events_hat = 0.0;       // D1 / f1
  double everpos_hat = 0.0;      // events_hat + sum_s M_s / f_s
  double p0_pos = 0.0;           // events_hat / everpos_hat
  double events_var = 0.0;       // Horvitz-Thompson variance of events_hat
  double nonevents_var = 0.0;    // same for everpos_hat - events_hat

  /// The weighted control-arm ever-positive column.
  ControlColumn column() const {
    return {events_hat, everpos_hat - events_hat, events_var, nonevents_var};
  }
};

/// Inverse-probability weighted control-arm ever-positive column. Design
/// variances assume independent Bernoulli selection within each stratum:
/// Var(M_s / f_s) = M_s (1 - f_s) / f_s^2.
/// Throws EstimationError when no ever-positive is observed.
IpwEstimate ipw_estimate(std::span<const StratumCount> strata,
                         const SamplingPlan& plan);

/// Tests a Bernoulli(f) sample of each control stratum of `decomp`
/// (events / non-events plan only). Returns per-stratum counts.
std::vector<StratumCount> sample_control_strata(const TrialDecomposition& decomp,
                                                const SamplingPlan& plan,
                                                Rng& rng);

/// Expected stratum counts under the plan (no sampling noise).
std::vector<StratumCount> expected_control_strata(const TrialDecomposition& decomp,
                                                  const SamplingPlan& plan);

// ---------------------------------------------------------------------------
// Loss of signal in stored control-arm specimens
// ---------------------------------------------------------------------------

/// Probability that a true control-arm ever-positive tests negative on its
/// stored specimen, by outcome. Gain of signal cannot happen.
struct DegradationModel {
  double loss_event = 0.0;
  double loss_nonevent = 0.0;

  void validate() const;
};

/// Expected-table variant: moves the lost fraction of each control-arm
/// ever-positive cell into the never-positive table.
TrialDecomposition apply_degradation(const TrialDecomposition& decomp,
                                     const DegradationModel& model);

/// Stochastic variant: each control-arm ever-positive independently loses
/// signal. The screen arm tests fresh specimens and is untouched.
TrialDecomposition apply_degradation(const TrialDecomposition& decomp,
                                     const DegradationModel& model, Rng& rng);

/// Fractions of screen-arm fresh-specimen positives whose stored specimen
/// also tests positive, by outcome, with the counts they came from.
struct RetestFractions {
  double r_event = 1.0;
  double r_nonevent = 1.0;
  double basis_event = 0.0;
  double basis_nonevent = 0.0;

  void validate() const;
  double var_event() const { return r_event * (1.0 - r_event) / basis_event; }
  double var_nonevent() const {
    return r_nonevent * (1.0 - r_nonevent) / basis_nonevent;
  }
};

/// Expected retest fractions (1 - loss) on the given basis.
RetestFractions estimate_retest_fractions(const OutcomeCounts& screen_everpos,
                                          const DegradationModel& model);

/// Retests every screen-arm ever-positive's stored specimen under the same
/// loss probabilities. Throws EstimationError when a stratum is empty or
/// no specimen retests positive.
RetestFractions estimate_retest_fractions(const OutcomeCounts& screen_everpos,
                                          const DegradationModel& model,
                                          Rng& rng);

/// Control-arm observed positivity P0(M~+|D+), P0(M~+|D-).
struct ObservedPositivity {
  double given_event = 0.0;
  double given_nonevent = 0.0;
};

/// Control-arm outcome rates P0(D+), P0(D-).
struct OutcomeRates {
  double event = 0.0;
  double nonevent = 0.0;
};

/// Corrected P0(D+|M+):
///   {1 + P0(D-)/P0(D+) * [q- / r-] / [q+ / r+]}^-1
/// with q = observed positivity and r = retest fraction.
double retest_correct_pos(const ObservedPositivity& observed,
                          const OutcomeRates& base, const RetestFractions& r);

struct CorrectedRate {
  double value = 0.0;
  bool clamped = false;  // a q/r ratio exceeded 1 and was clamped
};

/// Corrected P0(D+|M-):
///   {1 + P0(D-)/P0(D+) * (1 - q-/r-) / (1 - q+/r+)}^-1
CorrectedRate retest_correct_neg(const ObservedPositivity& observed,
                                 const OutcomeRates& base,
                                 const RetestFractions& r);

struct CorrectedColumns {
  ControlColumn ever;
  ControlColumn never;
  bool clamped = false;
};

/// Count form of the retest correction. Divides the observed control
/// ever-positive cells by the retest fractions and takes the never-positive
/// column as the remainder of the per-outcome totals. Agrees with
/// retest_correct_pos / retest_correct_neg.
///
/// Design variance of each corrected ever cell A = e / r:
///   Var(e) / r^2              subsampling
///   + A (1 - r) / r           Bernoulli loss of signal
///   + A^2 Var(r) / r^2        estimated retest fraction
CorrectedColumns retest_correct_columns(const ControlColumn& observed_ever,
                                        const OutcomeCounts& control_totals,
                                        const RetestFractions& r);

// ---------------------------------------------------------------------------
// Non-compliance with specimen collection
// ---------------------------------------------------------------------------

/// Non-compliance probability by arm and outcome. Non-compliers have
/// unknown ever-positivity.
struct NonComplianceModel {
  double screen_event = 0.0;
  double screen_nonevent = 0.0;
  double control_event = 0.0;
  double control_nonevent = 0.0;

  void validate() const;
};

/// Expected-table variant: every ever/never cell keeps the complying
/// fraction; the rest moves to the unknown table.
TrialDecomposition apply_noncompliance(const TrialDecomposition& decomp,
                                       const NonComplianceModel& model);

/// Stochastic variant: each individual independently fails to comply with
/// probability rate[arm][outcome].
TrialDecomposition apply_noncompliance(const TrialDecomposition& decomp,
                                       const NonComplianceModel& model,
                                       Rng& rng);

struct ComplianceRatios {
  double event = 1.0;
  double nonevent = 1.0;
};

/// c_d = screen compliance / control compliance for outcome d, with
/// compliance = 1 - unknown / total. Throws CorrectionUnavailable when a
/// rate cannot be formed.
ComplianceRatios compliance_ratios(const TrialDecomposition& decomp);

/// Multiplies the control-arm ever- and never-positive cells of outcome d
/// by c_d. The control unknown cells absorb the difference so the
/// decomposition still sums to the overall table. Screen arm unchanged.
TrialDecomposition compliance_ratio_correct(const TrialDecomposition& decomp);

enum class Positivity { ever, never };

/// Test of the compliance-corrected ever- (or never-) positive contrast.
/// The corrected control rate is
///   t+ s+ e+ / (t+ s+ e+ + t- s- e-)
/// (t: control outcome totals, s: screen compliance, e: ever-positive
/// share among control compliers). Its variance is the delta-method logit
/// variance 1/t+ + 1/t- + (1-e+)/(e+ k+) + (1-e-)/(e- k-) (k: control
/// compliers), conditional on the screen arm's compliance pattern, plus
/// the screen rate's binomial variance.
EstimateResult compliance_corrected_test(const TrialDecomposition& observed,
                                         Positivity which, Estimand label);

}  // namespace ietrial
