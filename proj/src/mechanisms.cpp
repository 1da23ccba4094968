#include "ietrial/mechanisms.hpp"

#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "ietrial/error.hpp"
#include "ietrial/normal.hpp"

namespace ietrial {

namespace {

void require_probability(const char* name, double v, bool allow_one = true) {
  const bool ok = v >= 0.0 && (allow_one ? v <= 1.0 : v < 1.0);
  if (!ok) {
    throw ConfigError(fmt::format("{} must lie in [0, {}{} (got {})", name, 1,
                                  allow_one ? "]" : ")", v));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double column_rate_variance(const ControlColumn& column) {
  const double total = column.total();
  if (!(total > 0.0)) {
    throw EstimationError("control column is empty");
  }
  const double t2 = total * total;
  return (column.nonevents * column.nonevents * column.events_var +
          column.events * column.events * column.nonevents_var) /
         (t2 * t2);
}

ControlColumn complement_column(const OutcomeCounts& totals,
                                const ControlColumn& column) {
  return {std::fmax(0.0, totals.events - column.events),
          std::fmax(0.0, totals.nonevents - column.nonevents), column.events_var,
          column.nonevents_var};
}

EstimateResult column_test(const OutcomeCounts& screen,
                           const ControlColumn& control, Estimand label) {
  const TwoByTwoTable table{screen.events, screen.nonevents, control.events,
                            control.nonevents};
  table.validate();
  const double extra = (control.events_var > 0.0 || control.nonevents_var > 0.0)
                           ? column_rate_variance(control)
                           : 0.0;
  return pooled_z_test(table, label, extra);
}

// ---------------------------------------------------------------------------

SamplingPlan::SamplingPlan(std::vector<Stratum> strata) : strata_(std::move(strata)) {
  if (strata_.empty()) {
    throw ConfigError("sampling plan needs at least the events stratum");
  }
  std::set<std::string> labels;
  for (const Stratum& s : strata_) {
    if (!(s.fraction > 0.0 && s.fraction <= 1.0)) {
      throw ConfigError(fmt::format("sampling fraction of stratum '{}' must lie in (0, 1] (got {})",
                                    s.label, s.fraction));
    }
    if (!labels.insert(s.label).second) {
      throw ConfigError(fmt::format("duplicate stratum label '{}'", s.label));
    }
  }
}

SamplingPlan SamplingPlan::events_and_nonevents(double f_events, double f_nonevents) {
  return SamplingPlan({{"control events (D+)", f_events},
                       {"control non-events (D-)", f_nonevents}});
}

IpwEstimate ipw_estimate(std::span<const StratumCount> strata,
                         const SamplingPlan& plan) {
  if (strata.size() != plan.size()) {
    throw EstimationError(fmt::format("{} stratum counts for a {}-stratum plan",
                                      strata.size(), plan.size()));
  }
  IpwEstimate out;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const double f = plan.fraction(s);
    const double m = strata[s].observed_positive;
    if (m < 0.0 || m > strata[s].sampled_n) {
      throw EstimationError(fmt::format(
          "stratum {}: observed positives {} outside [0, sampled {}]", s, m,
          strata[s].sampled_n));
    }
    const double weighted = m / f;
    const double var = m * (1.0 - f) / (f * f);
    if (s == 0) {
      out.events_hat = weighted;
      out.events_var = var;
    } else {
      out.everpos_hat += weighted;
      out.nonevents_var += var;
    }
  }
  out.everpos_hat += out.events_hat;
  if (!(out.everpos_hat > 0.0)) {
    throw EstimationError("no sampled control-arm ever-positives");
  }
  out.p0_pos = out.events_hat / out.everpos_hat;
  return out;
}

namespace {

void require_two_strata(const SamplingPlan& plan) {
  if (plan.size() != 2) {
    throw ConfigError(
        "specimen sampling of simulated trials supports exactly two strata "
        "(events, non-events)");
  }
}

}  // namespace

std::vector<StratumCount> sample_control_strata(const TrialDecomposition& decomp,
                                                const SamplingPlan& plan,
                                                Rng& rng) {
  require_two_strata(plan);
  const double f_e = plan.fraction(0);
  const double f_n = plan.fraction(1);
  const double pos_e = draw_binomial(rng, decomp.ever.events_control, f_e);
  const double neg_e = draw_binomial(rng, decomp.never.events_control, f_e);
  const double pos_n = draw_binomial(rng, decomp.ever.nonevents_control, f_n);
  const double neg_n = draw_binomial(rng, decomp.never.nonevents_control, f_n);
  return {{pos_e + neg_e, pos_e}, {pos_n + neg_n, pos_n}};
}

std::vector<StratumCount> expected_control_strata(const TrialDecomposition& decomp,
                                                  const SamplingPlan& plan) {
  require_two_strata(plan);
  const double f_e = plan.fraction(0);
  const double f_n = plan.fraction(1);
  return {{f_e * (decomp.ever.events_control + decomp.never.events_control),
           f_e * decomp.ever.events_control},
          {f_n * (decomp.ever.nonevents_control + decomp.never.nonevents_control),
           f_n * decomp.ever.nonevents_control}};
}

// ---------------------------------------------------------------------------

void DegradationModel::validate() const {
  require_probability("loss_event", loss_event);
  require_probability("loss_nonevent", loss_nonevent);
}

TrialDecomposition apply_degradation(const TrialDecomposition& decomp,
                                     const DegradationModel& model) {
  model.validate();
  TrialDecomposition out = decomp;
  const double lost_e = decomp.ever.events_control * model.loss_event;
  const double lost_n = decomp.ever.nonevents_control * model.loss_nonevent;
  out.ever.events_control -= lost_e;
  out.ever.nonevents_control -= lost_n;
  out.never.events_control += lost_e;
  out.never.nonevents_control += lost_n;
  return out;
}

TrialDecomposition apply_degradation(const TrialDecomposition& decomp,
                                     const DegradationModel& model, Rng& rng) {
  model.validate();
  TrialDecomposition out = decomp;
  const double lost_e = draw_binomial(rng, decomp.ever.events_control, model.loss_event);
  const double lost_n = draw_binomial(rng, decomp.ever.nonevents_control, model.loss_nonevent);
  out.ever.events_control -= lost_e;
  out.ever.nonevents_control -= lost_n;
  out.never.events_control += lost_e;
  out.never.nonevents_control += lost_n;
  return out;
}

void RetestFractions::validate() const {
  if (!(r_event > 0.0 && r_event <= 1.0) || !(r_nonevent > 0.0 && r_nonevent <= 1.0)) {
    throw CorrectionUnavailable(fmt::format(
        "retest fractions must lie in (0, 1] (got {}, {})", r_event, r_nonevent));
  }
  if (!(basis_event > 0.0) || !(basis_nonevent > 0.0)) {
    throw CorrectionUnavailable("retest fractions need a positive count basis");
  }
}

namespace {

void require_retest_basis(const OutcomeCounts& screen_everpos) {
  if (!(screen_everpos.events > 0.0) || !(screen_everpos.nonevents > 0.0)) {
    throw CorrectionUnavailable(
        "retest fractions need screen-arm ever-positives in both outcome strata");
  }
}

}  // namespace

RetestFractions estimate_retest_fractions(const OutcomeCounts& screen_everpos,
                                          const DegradationModel& model) {
  model.validate();
  require_retest_basis(screen_everpos);
  RetestFractions r{1.0 - model.loss_event, 1.0 - model.loss_nonevent,
                    screen_everpos.events, screen_everpos.nonevents};
  r.validate();
  return r;
}

RetestFractions estimate_retest_fractions(const OutcomeCounts& screen_everpos,
                                          const DegradationModel& model,
                                          Rng& rng) {
  model.validate();
  require_retest_basis(screen_everpos);
  const double kept_e =
      draw_survivors(rng, screen_everpos.events, model.loss_event);
  const double kept_n =
      draw_survivors(rng, screen_everpos.nonevents, model.loss_nonevent);
  RetestFractions r{kept_e / screen_everpos.events,
                    kept_n / screen_everpos.nonevents, screen_everpos.events,
                    screen_everpos.nonevents};
  r.validate();
  return r;
}

namespace {

void require_retest_inputs(const ObservedPositivity& q, const OutcomeRates& base,
                           const RetestFractions& r) {
  if (!(r.r_event > 0.0) || !(r.r_nonevent > 0.0)) {
    throw CorrectionUnavailable("retest fraction is zero");
  }
  if (!(base.event > 0.0) || !(base.nonevent > 0.0)) {
    throw CorrectionUnavailable("outcome rates must be positive");
  }
  if (q.given_event < 0.0 || q.given_nonevent < 0.0) {
    throw CorrectionUnavailable("observed positivity is negative");
  }
}

}  // namespace

double retest_correct_pos(const ObservedPositivity& observed,
                          const OutcomeRates& base, const RetestFractions& r) {
  require_retest_inputs(observed, base, r);
  if (!(observed.given_event > 0.0)) {
    throw CorrectionUnavailable("no observed ever-positives among control events");
  }
  const double bayes_factor = (observed.given_nonevent / r.r_nonevent) /
                              (observed.given_event / r.r_event);
  return 1.0 / (1.0 + base.nonevent / base.event * bayes_factor);
}

CorrectedRate retest_correct_neg(const ObservedPositivity& observed,
                                 const OutcomeRates& base,
                                 const RetestFractions& r) {
  require_retest_inputs(observed, base, r);
  CorrectedRate out;
  double ratio_e = observed.given_event / r.r_event;
  double ratio_n = observed.given_nonevent / r.r_nonevent;
  if (ratio_e > 1.0) {
    ratio_e = 1.0;
    out.clamped = true;
  }
  if (ratio_n > 1.0) {
    ratio_n = 1.0;
    out.clamped = true;
  }
  const double never_e = 1.0 - ratio_e;  // P0(M-|D+)
  const double never_n = 1.0 - ratio_n;  // P0(M-|D-)
  if (never_e == 0.0 && never_n == 0.0) {
    throw CorrectionUnavailable("corrected never-positive share is zero in both strata");
  }
  out.value = never_e / (never_e + base.nonevent / base.event * never_n);
  return out;
}

CorrectedColumns retest_correct_columns(const ControlColumn& observed_ever,
                                        const OutcomeCounts& control_totals,
                                        const RetestFractions& r) {
  r.validate();
  auto correct = [](double count, double count_var, double frac, double frac_var,
                    double& value, double& var) {
    value = count / frac;
    var = count_var / (frac * frac) + value * (1.0 - frac) / frac +
          value * value * frac_var / (frac * frac);
  };
  CorrectedColumns out;
  correct(observed_ever.events, observed_ever.events_var, r.r_event,
          r.var_event(), out.ever.events, out.ever.events_var);
  correct(observed_ever.nonevents, observed_ever.nonevents_var, r.r_nonevent,
          r.var_nonevent(), out.ever.nonevents, out.ever.nonevents_var);
  out.clamped = out.ever.events > control_totals.events ||
                out.ever.nonevents > control_totals.nonevents;
  out.never = complement_column(control_totals, out.ever);
  return out;
}

// ---------------------------------------------------------------------------

void NonComplianceModel::validate() const {
  require_probability("screen_event", screen_event, false);
  require_probability("screen_nonevent", screen_nonevent, false);
  require_probability("control_event", control_event, false);
  require_probability("control_nonevent", control_nonevent, false);
}

namespace {

// Applies `split(cell, rate)` -> non-compliers to every ever/never cell.
template <typename Split>
TrialDecomposition thin_by_compliance(const TrialDecomposition& decomp,
                                      const NonComplianceModel& model,
                                      Split split) {
  TrialDecomposition out = decomp;
  auto move = [&](double TwoByTwoTable::*cell, double rate) {
    for (TwoByTwoTable* table : {&out.ever, &out.never}) {
      const double gone = split(table->*cell, rate);
      table->*cell -= gone;
      out.unknown.*cell += gone;
    }
  };
  move(&TwoByTwoTable::events_screen, model.screen_event);
  move(&TwoByTwoTable::nonevents_screen, model.screen_nonevent);
  move(&TwoByTwoTable::events_control, model.control_event);
  move(&TwoByTwoTable::nonevents_control, model.control_nonevent);
  return out;
}

}  // namespace

TrialDecomposition apply_noncompliance(const TrialDecomposition& decomp,
                                       const NonComplianceModel& model) {
  model.validate();
  return thin_by_compliance(decomp, model,
                            [](double cell, double rate) { return cell * rate; });
}

TrialDecomposition apply_noncompliance(const TrialDecomposition& decomp,
                                       const NonComplianceModel& model,
                                       Rng& rng) {
  model.validate();
  return thin_by_compliance(decomp, model, [&rng](double cell, double rate) {
    return draw_binomial(rng, cell, rate);
  });
}

namespace {

double compliance_rate(const TrialDecomposition& d, double TwoByTwoTable::*cell,
                       const char* what) {
  const double total = d.ever.*cell + d.never.*cell + d.unknown.*cell;
  if (!(total > 0.0)) {
    throw CorrectionUnavailable(fmt::format("no participants in {}", what));
  }
  return 1.0 - d.unknown.*cell / total;
}

}  // namespace

ComplianceRatios compliance_ratios(const TrialDecomposition& decomp) {
  const double s_e = compliance_rate(decomp, &TwoByTwoTable::events_screen, "screen-arm D+");
  const double s_n = compliance_rate(decomp, &TwoByTwoTable::nonevents_screen, "screen-arm D-");
  const double c_e = compliance_rate(decomp, &TwoByTwoTable::events_control, "control-arm D+");
  const double c_n = compliance_rate(decomp, &TwoByTwoTable::nonevents_control, "control-arm D-");
  if (!(c_e > 0.0)) {
    throw CorrectionUnavailable("no compliers among control-arm D+");
  }
  if (!(c_n > 0.0)) {
    throw CorrectionUnavailable("no compliers among control-arm D-");
  }
  return {s_e / c_e, s_n / c_n};
}

TrialDecomposition compliance_ratio_correct(const TrialDecomposition& decomp) {
  const ComplianceRatios c = compliance_ratios(decomp);
  TrialDecomposition out = decomp;
  auto scale = [&](double TwoByTwoTable::*cell, double ratio) {
    const double total = decomp.ever.*cell + decomp.never.*cell + decomp.unknown.*cell;
    out.ever.*cell *= ratio;
    out.never.*cell *= ratio;
    out.unknown.*cell = total - out.ever.*cell - out.never.*cell;
  };
  scale(&TwoByTwoTable::events_control, c.event);
  scale(&TwoByTwoTable::nonevents_control, c.nonevent);
  return out;
}

EstimateResult compliance_corrected_test(const TrialDecomposition& observed,
                                         Positivity which, Estimand label) {
  const TrialDecomposition corrected = compliance_ratio_correct(observed);
  const bool ever = which == Positivity::ever;
  const TwoByTwoTable& obs = ever ? observed.ever : observed.never;
  const TwoByTwoTable& cor = ever ? corrected.ever : corrected.never;

  const double n1 = obs.n_screen();
  if (!(n1 > 0.0)) {
    throw EstimationError("screen arm is empty");
  }
  const double p1 = obs.events_screen / n1;

  const double k_e = observed.ever.events_control + observed.never.events_control;
  const double k_n = observed.ever.nonevents_control + observed.never.nonevents_control;
  const double t_e = k_e + observed.unknown.events_control;
  const double t_n = k_n + observed.unknown.nonevents_control;
  const double share_e = obs.events_control / k_e;
  const double share_n = obs.nonevents_control / k_n;
  if (!(share_e > 0.0) || !(share_n > 0.0)) {
    throw DegenerateTable("corrected control column has an empty cell");
  }

  const double n0 = cor.n_control();
  const double p0 = cor.events_control / n0;
  const double logit_var = 1.0 / t_e + 1.0 / t_n + (1.0 - share_e) / (share_e * k_e) +
                           (1.0 - share_n) / (share_n * k_n);
  const double var0 = std::pow(p0 * (1.0 - p0), 2) * logit_var;
  const double var1 = p1 * (1.0 - p1) / n1;
  const double variance = var0 + var1;
  if (!(variance > 0.0)) {
    throw DegenerateTable("compliance-corrected contrast has zero variance");
  }

  EstimateResult out;
  out.label = label;
  out.point = is_ratio(label) ? p1 / p0 : p0 - p1;
  out.pooled_rate = cor.events() / cor.total();
  out.se_null = std::sqrt(variance);
  out.z = (p0 - p1) / out.se_null;
  out.p_two_sided = two_sided_p(out.z);
  return out;
}

}  // namespace ietrial
