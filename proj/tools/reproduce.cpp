#include "reproduce.hpp"

#include <array>
#include <cmath>
#include <map>
#include <utility>

#include <fmt/format.h>

#include "ietrial/analytic_power.hpp"
#include "ietrial/error.hpp"
#include "ietrial/mechanisms.hpp"
#include "ietrial/scenario.hpp"
#include "published.hpp"

namespace ietrial::cli {

namespace {

constexpr std::array kTargets{
    std::pair{Target::fig1, "fig1"},       std::pair{Target::fig2, "fig2"},
    std::pair{Target::figS1, "figS1"},     std::pair{Target::figS2, "figS2"},
    std::pair{Target::figS3, "figS3"},     std::pair{Target::table1a, "table1a"},
    std::pair{Target::table1b, "table1b"}, std::pair{Target::table2a, "table2a"},
    std::pair{Target::table2b, "table2b"}, std::pair{Target::table2c, "table2c"},
    std::pair{Target::table3, "table3"}};

constexpr double kExact = 1e-6;

class Collector {
 public:
  explicit Collector(Target t) : target_(t) {}

  void add(std::string row, std::string quantity, std::optional<double> value,
           std::optional<double> tolerance, std::string note = {}) {
    rows_.push_back({std::string(to_string(target_)), std::move(row), std::move(quantity), value,
                     std::nullopt, tolerance, std::nullopt, std::move(note)});
  }

  // Attaches published values and decides pass/fail.
  std::vector<ReproRow> finish() && {
    std::map<std::pair<std::string, std::string>, double> pub;
    for (const PublishedValue& v : published_values(to_string(target_))) {
      pub[{v.row, v.quantity}] = v.value;
    }
    for (ReproRow& r : rows_) {
      auto it = pub.find({r.row, r.quantity});
      if (it == pub.end()) continue;
      r.published = it->second;
      pub.erase(it);
      if (r.reproduced && r.tolerance) {
        r.pass = std::fabs(*r.reproduced - *r.published) <= *r.tolerance;
      }
    }
    for (const auto& [key, value] : pub) {
      rows_.push_back({std::string(to_string(target_)), key.first, key.second, std::nullopt, value,
                       std::nullopt, false, "not reproduced"});
    }
    return std::move(rows_);
  }

 private:
  Target target_;
  std::vector<ReproRow> rows_;
};

double everpos_share_arm(const TwoByTwoTable& ever, double arm_total, bool screen) {
  return (screen ? ever.n_screen() : ever.n_control()) / arm_total;
}

// Ever-positive share among participants with known positivity.
double everpos_share_known(const TrialDecomposition& d, bool screen) {
  const double ever = screen ? d.ever.n_screen() : d.ever.n_control();
  const double never = screen ? d.never.n_screen() : d.never.n_control();
  return ever / (ever + never);
}

void fig1(Collector& c, const ReproOptions& opts) {
  const TrialScenario s;
  const TrialDecomposition d = expected_decomposition(s);
  const std::array<std::pair<const char*, TwoByTwoTable>, 3> tables{
      std::pair{"overall", decomposition_sum(d)}, std::pair{"ever", d.ever},
      std::pair{"never", d.never}};
  for (const auto& [name, t] : tables) {
    c.add(name, "events_screen", t.events_screen, kExact);
    c.add(name, "nonevents_screen", t.nonevents_screen, kExact);
    c.add(name, "events_control", t.events_control, kExact);
    c.add(name, "nonevents_control", t.nonevents_control, kExact);
    const EstimateResult e = pooled_z_test(t, Estimand::rr);
    const std::string_view n = name;
    c.add(name, "rr", e.point, n == "overall" ? 0.005 : n == "ever" ? 0.0005 : kExact);
    c.add(name, "rd", risk_difference(t), kExact);
    if (n == "overall") {
      c.add(name, "p", e.p_two_sided, 0.0005,
            "pooled-variance Z test; the printed value's method is not stated");
      c.add(name, "power", power_from_z(std::fabs(e.z), opts.alpha), 0.015);
    } else if (n == "ever") {
      c.add(name, "p", e.p_two_sided, 0.0002);
      c.add(name, "power", power_from_z(std::fabs(e.z), opts.alpha), 0.005);
    } else {
      c.add(name, "p", e.p_two_sided, kExact);
    }
  }
  SimConfig cfg;
  cfg.alpha = opts.alpha;
  const SimSummary sim = run_seeds(cfg, opts);
  c.add("ever", "simulated_power", sim.power_rr_pos, 0.01);
  c.add("overall", "simulated_power", sim.power_standard, std::nullopt);
}

void fig2(Collector& c, const ReproOptions& opts) {
  TrialScenario base;
  base.total_n = 50000;
  std::vector<double> rr_pos;
  for (int i = 50; i <= 90; ++i) rr_pos.push_back(i / 100.0);
  const std::array p_m{0.025, 0.05, 0.5, 0.9};
  const std::array rr_neg{1.0, 1.05, 0.95};
  for (const PowerCurvePoint& pt : power_curve(base, rr_pos, p_m, rr_neg, opts.alpha)) {
    c.add(fmt::format("rr_neg={:g};p_m={:g};rr_pos={:g}", pt.rr_neg, pt.p_m, pt.rr_pos),
          "power_pos", pt.feasible ? std::optional(pt.power_pos) : std::nullopt, std::nullopt,
          pt.note);
  }
  const TwoByTwoTable overall = decomposition_sum(expected_decomposition(base));
  c.add("standard", "power", power_from_z(noncentrality(overall), opts.alpha), 0.015,
        "trial size not stated for this figure; 50,000 total assumed");
}

void figS1(Collector& c, const ReproOptions& opts) {
  for (double rp : {0.8, 0.7}) {
    TrialScenario s;
    s.total_n = 25000;
    s.rr = 0.8;
    s.p_m = 0.025;
    s.rr_neg = 1.0;
    s.rr_pos = rp;
    const TrialDecomposition d = expected_decomposition(s);
    const std::string row = fmt::format("rr_pos={:g}", rp);
    c.add(row, "everpos_events", d.ever.events(), 0.5, "12,500 per arm (back-derived)");
    const double z = noncentrality(d.ever);
    c.add(row, "z_pos", z, std::nullopt);
    c.add(row, "power_pos", power_from_z(z, opts.alpha), std::nullopt);
  }
}

void noncompliance_figure(Collector& c, const NonComplianceModel& model, bool s3) {
  const TrialScenario s;
  const TrialDecomposition obs = apply_noncompliance(expected_decomposition(s), model);
  const TrialDecomposition cor = compliance_ratio_correct(obs);
  const ComplianceRatios ratio = compliance_ratios(obs);
  const double n1 = s.n_screen_real();
  const double n0 = s.n_control_real();

  c.add("observed", "control_ever_events", obs.ever.events_control, kExact);
  c.add("observed", "everpos_screen", everpos_share_arm(obs.ever, n1, true), 1e-9);
  c.add("observed", "everpos_control", everpos_share_arm(obs.ever, n0, false), 1e-9);
  c.add("observed", "unknown_control_events", obs.unknown.events_control, kExact);
  c.add("observed", "unknown_control_nonevents", obs.unknown.nonevents_control, kExact);
  c.add("observed", "rr_pos", relative_risk(obs.ever), s3 ? 0.05 : 0.0005);
  c.add("observed", "rr_neg", relative_risk(obs.never), s3 ? 0.05 : 0.0005);
  c.add("ratio", "c_event", ratio.event, 1e-9);
  c.add("ratio", "c_nonevent", ratio.nonevent, 1e-9);
  c.add("corrected", "control_ever_events", cor.ever.events_control, kExact);
  c.add("corrected", "control_ever_nonevents", cor.ever.nonevents_control, kExact);
  c.add("corrected", "everpos_screen", everpos_share_arm(cor.ever, n1, true), 1e-9);
  c.add("corrected", "everpos_control", everpos_share_arm(cor.ever, n0, false), 1e-9);
  c.add("corrected", "rr_pos", relative_risk(cor.ever), 0.0005);
  c.add("corrected", "rr_neg", relative_risk(cor.never), 1e-9);
}

void table1(Collector& c, const ReproOptions& opts, double f_event) {
  struct Column {
    std::int64_t n;
    double rr_pos;
    const char* label;
  };
  const std::array columns{Column{100000, 13.0 / 15.0, "0.867"}, Column{75000, 0.8, "0.8"},
                           Column{50000, 0.7, "0.7"}};
  for (const Column& col : columns) {
    for (int i = 1; i <= 10; ++i) {
      const double f = i / 10.0;
      SimConfig cfg;
      cfg.scenario.total_n = col.n;
      cfg.scenario.rr_pos = col.rr_pos;
      cfg.sampling = SamplingPlan::events_and_nonevents(f_event, f);
      cfg.alpha = opts.alpha;
      const SimSummary sim = run_seeds(cfg, opts);
      c.add(fmt::format("n={};rr_pos={};f={:g}", col.n, col.label, f), "power",
            sim.power_rr_pos, rate_tolerance(sim.power_rr_pos, sim.reps));
    }
  }
}

enum class Table2 { a, b, c };

void table2(Collector& c, const ReproOptions& opts, Table2 which) {
  std::vector<std::pair<double, double>> losses;
  if (which == Table2::a) {
    for (double l : {0.5, 0.4, 0.3, 0.2, 0.1, 0.0}) losses.emplace_back(l, l);
  } else {
    losses = {{0.5, 0.6}, {0.4, 0.5}, {0.3, 0.4}, {0.2, 0.3}, {0.1, 0.2}, {0.0, 0.1}, {0.0, 0.0}};
  }
  for (const auto& [le, ln] : losses) {
    SimConfig cfg;
    cfg.sampling = SamplingPlan::events_and_nonevents(0.95, 0.5);
    cfg.degradation = DegradationModel{le, ln};
    cfg.retest_correction = which == Table2::c;
    cfg.alpha = opts.alpha;
    const SimSummary sim = run_seeds(cfg, opts);
    const std::string row = fmt::format("loss_event={:g};loss_nonevent={:g}", le, ln);
    if (which == Table2::c) {
      c.add(row, "mean_corrected_rr_pos", sim.mean_corrected_rr_pos, 0.005);
      c.add(row, "mean_corrected_rr_neg", sim.mean_corrected_rr_neg, 0.01);
      c.add(row, "power_corrected_rr_pos", sim.power_corrected_rr_pos, 0.02);
      c.add(row, "alpha_corrected_rr_neg", sim.alpha_corrected_rr_neg, 0.01);
    } else {
      c.add(row, "mean_rr_pos", sim.mean_rr_pos, which == Table2::a ? 0.005 : 0.01);
      c.add(row, "mean_rr_neg", sim.mean_rr_neg, 0.01);
      c.add(row, "power_rr_pos", sim.power_rr_pos, rate_tolerance(sim.power_rr_pos, sim.reps));
      c.add(row, "alpha_rr_neg", sim.alpha_rr_neg,
            which == Table2::a ? 0.03 : rate_tolerance(sim.alpha_rr_neg, sim.reps));
    }
  }
}

void table3(Collector& c, const ReproOptions& opts) {
  const std::array<std::pair<const char*, NonComplianceModel>, 6> rows{
      std::pair{"perfect", NonComplianceModel{0.0, 0.0, 0.0, 0.0}},
      std::pair{"nondifferential", NonComplianceModel{0.3, 0.3, 0.3, 0.3}},
      std::pair{"by_arm", NonComplianceModel{0.2, 0.2, 0.3, 0.3}},
      std::pair{"by_outcome", NonComplianceModel{0.3, 0.1, 0.3, 0.1}},
      std::pair{"outcome_arm_1", NonComplianceModel{0.3, 0.15, 0.15, 0.3}},
      std::pair{"outcome_arm_2", NonComplianceModel{0.15, 0.3, 0.3, 0.15}}};
  const TrialScenario s;
  for (const auto& [name, model] : rows) {
    const TrialDecomposition obs = apply_noncompliance(expected_decomposition(s), model);
    c.add(name, "everpos_control", everpos_share_known(obs, false), 5e-5);
    c.add(name, "everpos_screen", everpos_share_known(obs, true), 5e-5);
    const TrialDecomposition cor = compliance_ratio_correct(obs);
    c.add(name, "expected_corrected_rr_pos", relative_risk(cor.ever), std::nullopt);
    const EstimateResult analytic = compliance_corrected_test(obs, Positivity::ever, Estimand::rr_pos);
    c.add(name, "analytic_power_corrected_rr_pos", power_from_z(std::fabs(analytic.z), opts.alpha),
          std::nullopt, "compliance-corrected Wald test on the expected tables");

    SimConfig cfg;
    cfg.noncompliance = model;
    cfg.compliance_correction = true;
    cfg.alpha = opts.alpha;
    const SimSummary sim = run_seeds(cfg, opts);
    c.add(name, "mean_rr_pos", sim.mean_rr_pos, 0.01);
    c.add(name, "mean_rr_neg", sim.mean_rr_neg, 0.01);
    c.add(name, "mean_corrected_rr_pos", sim.mean_corrected_rr_pos, 0.01);
    c.add(name, "mean_corrected_rr_neg", sim.mean_corrected_rr_neg, 0.01);
    c.add(name, "power_rr_pos", sim.power_rr_pos, 0.03);
    c.add(name, "power_corrected_rr_pos", sim.power_corrected_rr_pos, std::nullopt,
          "not compared: the published column's test is unspecified");
    c.add(name, "alpha_corrected_rr_neg", sim.alpha_corrected_rr_neg, 0.01);
  }
}

}  // namespace

std::string_view to_string(Target t) {
  for (const auto& [target, name] : kTargets) {
    if (target == t) return name;
  }
  return "?";
}

Target parse_target(std::string_view name) {
  for (const auto& [target, n] : kTargets) {
    if (name == n) return target;
  }
  throw ConfigError(fmt::format("unknown reproduction target '{}'", name));
}

std::vector<Target> all_targets() {
  std::vector<Target> out;
  for (const auto& entry : kTargets) out.push_back(entry.first);
  return out;
}

double rate_tolerance(double p, std::int64_t n) {
  return std::fmax(0.02, 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
}

SimSummary run_seeds(SimConfig cfg, const ReproOptions& opts) {
  if (opts.seeds < 1) throw ConfigError("seeds must be >= 1");
  cfg.reps = opts.reps;
  cfg.workers = opts.workers;
  std::vector<SimSummary> runs;
  for (int k = 0; k < opts.seeds; ++k) {
    cfg.seed = opts.seed + static_cast<std::uint64_t>(k);
    runs.push_back(run_study(cfg));
  }
  if (runs.size() == 1) return runs.front();

  const double k = static_cast<double>(runs.size());
  auto mean = [&](auto field) {
    double sum = 0.0;
    for (const SimSummary& r : runs) sum += field(r);
    return sum / k;
  };
  auto mean_opt = [&](std::optional<double> SimSummary::*field) -> std::optional<double> {
    if (!(runs.front().*field)) return std::nullopt;
    return mean([&](const SimSummary& r) { return *(r.*field); });
  };
  SimSummary out;
  out.reps = opts.reps * opts.seeds;
  out.mean_rr_pos = mean([](const SimSummary& r) { return r.mean_rr_pos; });
  out.mean_rr_neg = mean([](const SimSummary& r) { return r.mean_rr_neg; });
  out.mean_corrected_rr_pos = mean_opt(&SimSummary::mean_corrected_rr_pos);
  out.mean_corrected_rr_neg = mean_opt(&SimSummary::mean_corrected_rr_neg);
  out.power_standard = mean([](const SimSummary& r) { return r.power_standard; });
  out.power_rr_pos = mean([](const SimSummary& r) { return r.power_rr_pos; });
  out.power_corrected_rr_pos = mean_opt(&SimSummary::power_corrected_rr_pos);
  out.alpha_rr_neg = mean([](const SimSummary& r) { return r.alpha_rr_neg; });
  out.alpha_corrected_rr_neg = mean_opt(&SimSummary::alpha_corrected_rr_neg);
  for (const SimSummary& r : runs) out.degenerate_reps += r.degenerate_reps;
  out.monte_carlo_se_power =
      std::sqrt(out.power_rr_pos * (1.0 - out.power_rr_pos) / static_cast<double>(out.reps));
  return out;
}

std::vector<ReproRow> reproduce(Target target, const ReproOptions& opts) {
  Collector c(target);
  switch (target) {
    case Target::fig1: fig1(c, opts); break;
    case Target::fig2: fig2(c, opts); break;
    case Target::figS1: figS1(c, opts); break;
    case Target::figS2: noncompliance_figure(c, {0.2, 0.2, 0.3, 0.3}, false); break;
    case Target::figS3: noncompliance_figure(c, {0.4, 0.8, 0.8, 0.4}, true); break;
    case Target::table1a: table1(c, opts, 1.0); break;
    case Target::table1b: table1(c, opts, 0.8); break;
    case Target::table2a: table2(c, opts, Table2::a); break;
    case Target::table2b: table2(c, opts, Table2::b); break;
    case Target::table2c: table2(c, opts, Table2::c); break;
    case Target::table3: table3(c, opts); break;
  }
  return std::move(c).finish();
}

Report repro_report(const std::vector<ReproRow>& rows) {
  Report r;
  r.columns = {"target", "row", "quantity", "reproduced", "published", "tolerance", "pass", "note"};
  auto num = [](const std::optional<double>& v) -> Cell {
    if (!v) return std::monostate{};
    return *v;
  };
  for (const ReproRow& row : rows) {
    Cell pass = std::string("na");
    if (row.pass) pass = std::string(*row.pass ? "pass" : "fail");
    r.add_row({row.target, row.row, row.quantity, num(row.reproduced), num(row.published),
               num(row.tolerance), pass, row.note});
  }
  return r;
}

}  // namespace ietrial::cli
