#include "ietrial/tables.hpp"

#include <cmath>
#include <string>

#include "ietrial/error.hpp"
#include "ietrial/normal.hpp"

namespace ietrial {

bool TwoByTwoTable::is_zero() const {
  return events_screen == 0.0 && nonevents_screen == 0.0 &&
         events_control == 0.0 && nonevents_control == 0.0;
}

void TwoByTwoTable::validate() const {
  for (double cell : {events_screen, nonevents_screen, events_control,
                      nonevents_control}) {
    if (!std::isfinite(cell) || cell < 0.0) {
      throw EstimationError("table cell is negative or not finite: " +
                            std::to_string(cell));
    }
  }
}

TwoByTwoTable& TwoByTwoTable::operator+=(const TwoByTwoTable& other) {
  events_screen += other.events_screen;
  nonevents_screen += other.nonevents_screen;
  events_control += other.events_control;
  nonevents_control += other.nonevents_control;
  return *this;
}

RiskRates risk_rates(const TwoByTwoTable& table) {
  if (!(table.n_screen() > 0.0)) {
    throw EstimationError("screen arm is empty");
  }
  if (!(table.n_control() > 0.0)) {
    throw EstimationError("control arm is empty");
  }
  return {table.events_screen / table.n_screen(),
          table.events_control / table.n_control()};
}

double relative_risk(const TwoByTwoTable& table) {
  const RiskRates r = risk_rates(table);
  if (!(table.events_control > 0.0)) {
    throw EstimationError("relative risk undefined: no control-arm events");
  }
  return r.screen / r.control;
}

double risk_difference(const TwoByTwoTable& table) {
  const RiskRates r = risk_rates(table);
  return r.control - r.screen;
}

std::string_view to_string(Estimand e) {
  switch (e) {
    case Estimand::rr: return "RR";
    case Estimand::rd: return "RD";
    case Estimand::rr_pos: return "RR_pos";
    case Estimand::rd_pos: return "RD_pos";
    case Estimand::rr_neg: return "RR_neg";
    case Estimand::rd_neg: return "RD_neg";
  }
  return "?";
}

bool is_ratio(Estimand e) {
  return e == Estimand::rr || e == Estimand::rr_pos || e == Estimand::rr_neg;
}

EstimateResult pooled_z_test(const TwoByTwoTable& table, Estimand label,
                             double extra_control_variance) {
  const RiskRates r = risk_rates(table);
  const double pooled = table.events() / table.total();
  if (!(pooled > 0.0 && pooled < 1.0)) {
    throw DegenerateTable("pooled rate is " + std::to_string(pooled));
  }
  const double variance =
      pooled * (1.0 - pooled) *
          (1.0 / table.n_screen() + 1.0 / table.n_control()) +
      extra_control_variance;

  EstimateResult out;
  out.label = label;
  out.point = is_ratio(label) ? relative_risk(table) : r.control - r.screen;
  out.pooled_rate = pooled;
  out.se_null = std::sqrt(variance);
  out.z = (r.control - r.screen) / out.se_null;
  out.p_two_sided = two_sided_p(out.z);
  return out;
}

TwoByTwoTable decomposition_sum(const TrialDecomposition& d) {
  return d.ever + d.never + d.unknown;
}

}  // namespace ietrial
