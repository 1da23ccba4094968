#include "ietrial/scenario.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ietrial/error.hpp"

namespace ietrial {

namespace {

constexpr double kRateSlack = 1e-12;

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

// Clamp float noise at the [0, 1] boundary; reject anything beyond it.
bool fits_unit(double& v) {
  if (v < -kRateSlack || v > 1.0 + kRateSlack || !std::isfinite(v)) {
    return false;
  }
  v = std::fmin(1.0, std::fmax(0.0, v));
  return true;
}

bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-12 * std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
}

}  // namespace

double TrialScenario::n_control_real() const {
  return static_cast<double>(total_n) * control_fraction;
}

double TrialScenario::n_screen_real() const {
  return static_cast<double>(total_n) - n_control_real();
}

std::int64_t TrialScenario::n_control() const {
  return std::llround(static_cast<double>(total_n) * control_fraction);
}

std::int64_t TrialScenario::n_screen() const {
  return total_n - n_control();
}

void TrialScenario::validate() const {
  if (total_n < 2) {
    throw InfeasibleScenario(fmt::format("total_n must be >= 2 (got {})", total_n));
  }
  if (!in_open_unit(control_fraction)) {
    throw InfeasibleScenario(fmt::format(
        "control_fraction must lie in (0, 1) (got {})", control_fraction));
  }
  if (!in_open_unit(p0)) {
    throw InfeasibleScenario(fmt::format("p0 must lie in (0, 1) (got {})", p0));
  }
  if (!(p_m >= 0.0 && p_m <= 1.0)) {
    throw InfeasibleScenario(fmt::format("p_m must lie in [0, 1] (got {})", p_m));
  }
  for (auto [name, value] : {std::pair{"rr", rr}, std::pair{"rr_neg", rr_neg},
                             std::pair{"rr_pos", rr_pos}}) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InfeasibleScenario(fmt::format("{} must be > 0 (got {})", name, value));
    }
  }
  if (n_control() < 1 || n_screen() < 1) {
    throw InfeasibleScenario("both arms need at least one participant");
  }
}

ConditionalRates solve_rates(const TrialScenario& s) {
  s.validate();

  double x = 0.0;
  double y = 0.0;
  if (s.p_m == 1.0 || s.p_m == 0.0) {
    // Only one positivity class exists; its rate is p0 and its relative
    // risk must carry the whole trial effect.
    const bool all_pos = s.p_m == 1.0;
    const double carried = all_pos ? s.rr_pos : s.rr_neg;
    if (!nearly_equal(carried, s.rr)) {
      throw InfeasibleScenario(fmt::format(
          "p_m = {} requires {} == rr (got {} vs {})", s.p_m,
          all_pos ? "rr_pos" : "rr_neg", carried, s.rr));
    }
    x = s.p0;
    y = s.p0;
  } else if (nearly_equal(s.rr_pos, s.rr_neg)) {
    if (!nearly_equal(s.rr_pos, s.rr)) {
      throw InfeasibleScenario(fmt::format(
          "rr_pos == rr_neg == {} cannot average to rr = {}", s.rr_pos, s.rr));
    }
    x = s.p0;
    y = s.p0;
  } else {
    const double denom = s.rr_neg - s.rr_pos;
    x = s.p0 * (s.rr_neg - s.rr) / (s.p_m * denom);
    y = s.p0 * (s.rr - s.rr_pos) / ((1.0 - s.p_m) * denom);
  }

  double screen_x = s.rr_pos * x;
  double screen_y = s.rr_neg * y;
  const bool ok = fits_unit(x) & fits_unit(y) & fits_unit(screen_x) &
                  fits_unit(screen_y);
  if (!ok) {
    throw InfeasibleScenario(fmt::format(
        "infeasible scenario: P0(D+|M+) = {:.6g}, P0(D+|M-) = {:.6g}, "
        "P1(D+|M+) = {:.6g}, P1(D+|M-) = {:.6g}; all must lie in [0, 1]",
        x, y, screen_x, screen_y));
  }
  return {x, y};
}

TrialDecomposition expected_decomposition(const TrialScenario& s) {
  const ConditionalRates rates = solve_rates(s);
  const double n0 = s.n_control_real();
  const double n1 = s.n_screen_real();
  const double pos_screen = n1 * s.p_m;
  const double pos_control = n0 * s.p_m;
  const double neg_screen = n1 - pos_screen;
  const double neg_control = n0 - pos_control;
  const double screen_x = s.rr_pos * rates.ever_positive;
  const double screen_y = s.rr_neg * rates.never_positive;

  TrialDecomposition d;
  d.ever.events_screen = pos_screen * screen_x;
  d.ever.nonevents_screen = pos_screen - d.ever.events_screen;
  d.ever.events_control = pos_control * rates.ever_positive;
  d.ever.nonevents_control = pos_control - d.ever.events_control;
  d.never.events_screen = neg_screen * screen_y;
  d.never.nonevents_screen = neg_screen - d.never.events_screen;
  d.never.events_control = neg_control * rates.never_positive;
  d.never.nonevents_control = neg_control - d.never.events_control;
  return d;
}

double pooled_everpos_rate(const TrialScenario& s) {
  s.validate();
  if (s.control_fraction != 0.5) {
    throw InfeasibleScenario("pooled_everpos_rate requires equal arm sizes");
  }
  if (s.rr_neg == s.rr_pos) {
    throw InfeasibleScenario(
        "pooled_everpos_rate is undefined for rr_neg == rr_pos; use "
        "expected_decomposition");
  }
  if (s.p_m == 0.0) {
    throw InfeasibleScenario("pooled_everpos_rate requires p_m > 0");
  }
  return 0.5 * (s.p0 / s.p_m) * (1.0 + s.rr_pos) * (s.rr_neg - s.rr) /
         (s.rr_neg - s.rr_pos);
}

}  // namespace ietrial
