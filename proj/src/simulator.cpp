#include "ietrial/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "ietrial/error.hpp"

namespace ietrial {

void SimConfig::validate() const {
  if (reps < 1) {
    throw ConfigError(fmt::format("reps must be >= 1 (got {})", reps));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha must lie in (0, 1) (got {})", alpha));
  }
  if (sampling && sampling->size() != 2) {
    throw ConfigError("simulated sampling plans have exactly two strata (events, non-events)");
  }
  if (degradation) degradation->validate();
  if (noncompliance) noncompliance->validate();
  if (retest_correction && !degradation) {
    throw ConfigError("retest correction needs a degradation model");
  }
  if (compliance_correction && !noncompliance) {
    throw ConfigError("compliance correction needs a non-compliance model");
  }
  if (retest_correction && compliance_correction) {
    throw ConfigError("retest and compliance corrections cannot be combined");
  }
  if (compliance_correction && (sampling || degradation)) {
    throw ConfigError(
        "compliance correction is only defined for fully tested, undegraded specimens");
  }
  solve_rates(scenario);
}

TrialDecomposition simulate_decomposition(const TrialScenario& s, Rng& rng) {
  const ConditionalRates rates = solve_rates(s);
  const double n1 = static_cast<double>(s.n_screen());
  const double n0 = static_cast<double>(s.n_control());

  const double ever1 = draw_binomial(rng, n1, s.p_m);
  const double ever0 = draw_binomial(rng, n0, s.p_m);
  const double never1 = n1 - ever1;
  const double never0 = n0 - ever0;

  const double p1_pos = std::fmin(1.0, s.rr_pos * rates.ever_positive);
  const double p1_neg = std::fmin(1.0, s.rr_neg * rates.never_positive);

  TrialDecomposition d;
  d.ever.events_screen = draw_binomial(rng, ever1, p1_pos);
  d.ever.events_control = draw_binomial(rng, ever0, rates.ever_positive);
  d.never.events_screen = draw_binomial(rng, never1, p1_neg);
  d.never.events_control = draw_binomial(rng, never0, rates.never_positive);
  d.ever.nonevents_screen = ever1 - d.ever.events_screen;
  d.ever.nonevents_control = ever0 - d.ever.events_control;
  d.never.nonevents_screen = never1 - d.never.events_screen;
  d.never.nonevents_control = never0 - d.never.events_control;
  return d;
}

namespace {

template <typename F>
std::optional<EstimateResult> attempt(F&& f, bool& degenerate) {
  try {
    return f();
  } catch (const EstimationError&) {
    degenerate = true;
    return std::nullopt;
  }
}

OutcomeCounts screen_column(const TwoByTwoTable& t) {
  return {t.events_screen, t.nonevents_screen};
}

ControlColumn control_column(const TwoByTwoTable& t) {
  return {t.events_control, t.nonevents_control, 0.0, 0.0};
}

}  // namespace

ReplicateResult run_replicate(const SimConfig& cfg, std::uint64_t index) {
  Rng rng = rng_stream(cfg.seed, index);
  ReplicateResult out;

  TrialDecomposition d = simulate_decomposition(cfg.scenario, rng);
  try {
    out.reject_standard = pooled_z_test(decomposition_sum(d)).p_two_sided < cfg.alpha;
  } catch (const EstimationError&) {
    out.degenerate = true;
  }

  if (cfg.noncompliance) d = apply_noncompliance(d, *cfg.noncompliance, rng);
  if (cfg.degradation) d = apply_degradation(d, *cfg.degradation, rng);

  // Control compliers by outcome: every one of them has a known
  // ever-positive status once their specimens are tested.
  const OutcomeCounts control_totals{d.ever.events_control + d.never.events_control,
                                     d.ever.nonevents_control + d.never.nonevents_control};

  std::optional<ControlColumn> observed_ever;
  if (cfg.sampling) {
    const auto strata = sample_control_strata(d, *cfg.sampling, rng);
    try {
      observed_ever = ipw_estimate(strata, *cfg.sampling).column();
    } catch (const EstimationError&) {
      out.degenerate = true;
    }
  } else {
    observed_ever = control_column(d.ever);
  }

  if (observed_ever) {
    const ControlColumn never = complement_column(control_totals, *observed_ever);
    out.rr_pos = attempt([&] { return column_test(screen_column(d.ever), *observed_ever,
                                                  Estimand::rr_pos); },
                         out.degenerate);
    out.rr_neg = attempt([&] { return column_test(screen_column(d.never), never,
                                                  Estimand::rr_neg); },
                         out.degenerate);
  }

  if (cfg.retest_correction) {
    std::optional<RetestFractions> r;
    try {
      r = estimate_retest_fractions(screen_column(d.ever), *cfg.degradation, rng);
    } catch (const EstimationError&) {
      out.degenerate = true;
    }
    if (r && observed_ever) {
      const CorrectedColumns c = retest_correct_columns(*observed_ever, control_totals, *r);
      out.corrected_rr_pos = attempt(
          [&] { return column_test(screen_column(d.ever), c.ever, Estimand::rr_pos); },
          out.degenerate);
      out.corrected_rr_neg = attempt(
          [&] { return column_test(screen_column(d.never), c.never, Estimand::rr_neg); },
          out.degenerate);
    }
  } else if (cfg.compliance_correction) {
    out.corrected_rr_pos = attempt(
        [&] { return compliance_corrected_test(d, Positivity::ever, Estimand::rr_pos); },
        out.degenerate);
    out.corrected_rr_neg = attempt(
        [&] { return compliance_corrected_test(d, Positivity::never, Estimand::rr_neg); },
        out.degenerate);
  }
  return out;
}

namespace {

struct Tally {
  double sum = 0.0;
  std::int64_t n = 0;
  std::int64_t rejections = 0;

  void add(const std::optional<EstimateResult>& e, double alpha) {
    if (!e) return;
    sum += e->point;
    ++n;
    if (e->p_two_sided < alpha) ++rejections;
  }
  double mean() const {
    return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  }
  double rate(std::int64_t reps) const {
    return static_cast<double>(rejections) / static_cast<double>(reps);
  }
};

}  // namespace

SimSummary run_study(const SimConfig& cfg) {
  cfg.validate();
  const auto reps = static_cast<std::size_t>(cfg.reps);
  std::vector<ReplicateResult> results(reps);

  unsigned workers = cfg.workers != 0 ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::min<std::size_t>(reps, 256)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < reps && !failed; i = next++) {
        results[i] = run_replicate(cfg, i);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Tally pos, neg, cpos, cneg;
  std::int64_t standard = 0;
  SimSummary s;
  s.reps = cfg.reps;
  for (const ReplicateResult& r : results) {
    if (r.reject_standard) ++standard;
    pos.add(r.rr_pos, cfg.alpha);
    neg.add(r.rr_neg, cfg.alpha);
    cpos.add(r.corrected_rr_pos, cfg.alpha);
    cneg.add(r.corrected_rr_neg, cfg.alpha);
    if (r.degenerate) ++s.degenerate_reps;
  }
  s.mean_rr_pos = pos.mean();
  s.mean_rr_neg = neg.mean();
  s.power_standard = static_cast<double>(standard) / static_cast<double>(cfg.reps);
  s.power_rr_pos = pos.rate(cfg.reps);
  s.alpha_rr_neg = neg.rate(cfg.reps);
  if (cfg.corrected()) {
    s.mean_corrected_rr_pos = cpos.mean();
    s.mean_corrected_rr_neg = cneg.mean();
    s.power_corrected_rr_pos = cpos.rate(cfg.reps);
    s.alpha_corrected_rr_neg = cneg.rate(cfg.reps);
  }
  s.monte_carlo_se_power =
      std::sqrt(s.power_rr_pos * (1.0 - s.power_rr_pos) / static_cast<double>(cfg.reps));
  return s;
}

double estimate_type1_error(const SimConfig& cfg, NullTarget target) {
  if (cfg.scenario.rr_neg != 1.0) {
    throw ConfigError(fmt::format(
        "type-1 error of the RR_neg test needs rr_neg = 1 (got {})", cfg.scenario.rr_neg));
  }
  if (target == NullTarget::corrected_rr_neg && !cfg.corrected()) {
    throw ConfigError("no correction configured");
  }
  const SimSummary s = run_study(cfg);
  return target == NullTarget::rr_neg ? s.alpha_rr_neg : *s.alpha_corrected_rr_neg;
}

}  // namespace ietrial
