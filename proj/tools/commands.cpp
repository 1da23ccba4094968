#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "ietrial/analytic_power.hpp"
#include "ietrial/error.hpp"

namespace ietrial::cli {

namespace {

std::vector<Cell> scenario_cells(const TrialScenario& s) {
  return {s.total_n, s.control_fraction, s.p0, s.rr, s.p_m, s.rr_neg, s.rr_pos};
}

const std::vector<std::string> kScenarioColumns{"total_n", "control_fraction", "p0", "rr",
                                                "p_m",     "rr_neg",           "rr_pos"};

Cell opt(const std::optional<double>& v) {
  if (!v) return std::monostate{};
  return *v;
}

}  // namespace

Report power_report(const RunConfig& cfg, double alpha, std::optional<double> target_power) {
  Report r;
  r.columns = kScenarioColumns;
  for (const char* c : {"alpha", "rate_ever_positive", "rate_never_positive", "z_standard", "z_pos",
                        "z_ratio", "power_standard", "power_pos"}) {
    r.columns.emplace_back(c);
  }
  if (target_power) {
    r.columns.emplace_back("target_power");
    r.columns.emplace_back("n_per_arm_intended_effect");
    r.columns.emplace_back("n_per_arm_standard");
  }
  for (const SimConfig& cell : cfg.cells) {
    const PowerResult p = analytic_power(cell.scenario, alpha);
    std::vector<Cell> row = scenario_cells(cell.scenario);
    for (double v : {alpha, p.rates.ever_positive, p.rates.never_positive, p.z_standard, p.z_pos,
                     p.z_ratio, p.power_standard, p.power_pos}) {
      row.emplace_back(v);
    }
    if (target_power) {
      row.emplace_back(*target_power);
      row.emplace_back(required_n_per_arm(cell.scenario, Analysis::intended_effect, *target_power, alpha));
      row.emplace_back(required_n_per_arm(cell.scenario, Analysis::standard, *target_power, alpha));
    }
    r.add_row(std::move(row));
  }
  return r;
}

std::vector<std::string> simulate_columns() {
  std::vector<std::string> cols = kScenarioColumns;
  for (const char* c :
       {"sampling_f_event", "sampling_f_nonevent", "loss_event", "loss_nonevent", "retest_correction",
        "nc_screen_event", "nc_screen_nonevent", "nc_control_event", "nc_control_nonevent",
        "compliance_correction", "mean_rr_pos", "mean_rr_neg", "mean_corrected_rr_pos",
        "mean_corrected_rr_neg", "power_standard", "power_rr_pos", "power_corrected_rr_pos",
        "alpha_rr_neg", "alpha_corrected_rr_neg", "degenerate_reps", "seed"}) {
    cols.emplace_back(c);
  }
  return cols;
}

Report simulate_report(const std::vector<SimConfig>& cells, const std::vector<SimSummary>& results) {
  Report r;
  r.columns = simulate_columns();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SimConfig& c = cells[i];
    const SimSummary& s = results.at(i);
    std::vector<Cell> row = scenario_cells(c.scenario);
    const Cell none = std::monostate{};
    if (c.sampling) {
      row.insert(row.end(), {c.sampling->fraction(0), c.sampling->fraction(1)});
    } else {
      row.insert(row.end(), {none, none});
    }
    if (c.degradation) {
      row.insert(row.end(), {c.degradation->loss_event, c.degradation->loss_nonevent,
                             static_cast<std::int64_t>(c.retest_correction)});
    } else {
      row.insert(row.end(), {none, none, none});
    }
    if (c.noncompliance) {
      const NonComplianceModel& n = *c.noncompliance;
      row.insert(row.end(), {n.screen_event, n.screen_nonevent, n.control_event, n.control_nonevent,
                             static_cast<std::int64_t>(c.compliance_correction)});
    } else {
      row.insert(row.end(), {none, none, none, none, none});
    }
    row.insert(row.end(), {s.mean_rr_pos, s.mean_rr_neg, opt(s.mean_corrected_rr_pos),
                           opt(s.mean_corrected_rr_neg), s.power_standard, s.power_rr_pos,
                           opt(s.power_corrected_rr_pos), s.alpha_rr_neg,
                           opt(s.alpha_corrected_rr_neg), s.degenerate_reps,
                           static_cast<std::int64_t>(c.seed)});
    r.add_row(std::move(row));
  }
  return r;
}

Report simulate(const RunConfig& cfg) {
  for (const SimConfig& c : cfg.cells) c.validate();
  std::vector<SimSummary> results;
  results.reserve(cfg.cells.size());
  for (const SimConfig& c : cfg.cells) results.push_back(run_study(c));
  return simulate_report(cfg.cells, results);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_count(const std::string& text, std::size_t line, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v) || v < 0.0) {
    throw ConfigError(fmt::format("line {}, column '{}': expected a non-negative count, got '{}'",
                                  line, column, text));
  }
  return v;
}

}  // namespace

TrialDecomposition read_decomposition(std::istream& in) {
  static const std::vector<std::string> kHeader{"table", "events_screen", "nonevents_screen",
                                                "events_control", "nonevents_control"};
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  TrialDecomposition d;
  bool seen[3] = {false, false, false};
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split(line, ',');
    for (auto& f : fields) f = trim(f);
    if (!header) {
      if (fields != kHeader) {
        throw ConfigError(fmt::format(
            "line {}: header must be 'table,events_screen,nonevents_screen,events_control,"
            "nonevents_control'", lineno));
      }
      header = true;
      continue;
    }
    if (fields.size() != kHeader.size()) {
      throw ConfigError(fmt::format("line {}: expected {} columns, found {}", lineno, kHeader.size(),
                                    fields.size()));
    }
    int which = -1;
    if (fields[0] == "ever") which = 0;
    if (fields[0] == "never") which = 1;
    if (fields[0] == "unknown") which = 2;
    if (which < 0) {
      throw ConfigError(fmt::format("line {}, column 'table': expected ever, never or unknown, got '{}'",
                                    lineno, fields[0]));
    }
    if (seen[which]) {
      throw ConfigError(fmt::format("line {}: duplicate '{}' row", lineno, fields[0]));
    }
    seen[which] = true;
    TwoByTwoTable t{parse_count(fields[1], lineno, kHeader[1]), parse_count(fields[2], lineno, kHeader[2]),
                    parse_count(fields[3], lineno, kHeader[3]), parse_count(fields[4], lineno, kHeader[4])};
    (which == 0 ? d.ever : which == 1 ? d.never : d.unknown) = t;
  }
  if (!header) throw ConfigError("decomposition file is empty");
  if (!seen[0]) throw ConfigError("decomposition file has no 'ever' row");
  if (!seen[1]) throw ConfigError("decomposition file has no 'never' row");
  return d;
}

TrialDecomposition load_decomposition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path));
  return read_decomposition(in);
}

RetestSpec parse_retest(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 2 && parts.size() != 4) {
    throw ConfigError("--retest takes r_event,r_nonevent[,basis_event,basis_nonevent]");
  }
  auto num = [&](std::size_t i) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) {
      throw ConfigError(fmt::format("--retest: '{}' is not a number", parts[i]));
    }
    return v;
  };
  RetestSpec spec{num(0), num(1), std::nullopt, std::nullopt};
  if (parts.size() == 4) {
    spec.basis_event = num(2);
    spec.basis_nonevent = num(3);
  }
  if (!(spec.r_event > 0.0 && spec.r_event <= 1.0) || !(spec.r_nonevent > 0.0 && spec.r_nonevent <= 1.0)) {
    throw ConfigError("retest fractions must lie in (0, 1]");
  }
  return spec;
}

Report analyze_report(const TrialDecomposition& d, const std::optional<RetestSpec>& retest) {
  for (const TwoByTwoTable* t : {&d.ever, &d.never, &d.unknown}) t->validate();
  const bool has_unknown = !d.unknown.is_zero();
  if (retest && has_unknown) {
    throw ConfigError("retest and compliance corrections cannot be combined");
  }

  Report r;
  r.columns = {"analysis", "correction", "estimand", "point", "pooled_rate", "se_null", "z",
               "p_two_sided", "note"};
  auto emit = [&](const char* analysis, const char* correction, Estimand label,
                  const std::function<EstimateResult()>& f) {
    try {
      const EstimateResult e = f();
      r.add_row({std::string(analysis), std::string(correction), std::string(to_string(label)), e.point,
                 e.pooled_rate, e.se_null, e.z, e.p_two_sided, std::string()});
    } catch (const EstimationError& err) {
      const Cell none = std::monostate{};
      r.add_row({std::string(analysis), std::string(correction), std::string(to_string(label)), none,
                 none, none, none, none, std::string(err.what())});
    }
  };

  const TwoByTwoTable overall = decomposition_sum(d);
  emit("observed", "none", Estimand::rr, [&] { return pooled_z_test(overall, Estimand::rr); });
  emit("observed", "none", Estimand::rd, [&] { return pooled_z_test(overall, Estimand::rd); });
  emit("observed", "none", Estimand::rr_pos, [&] { return pooled_z_test(d.ever, Estimand::rr_pos); });
  emit("observed", "none", Estimand::rd_pos, [&] { return pooled_z_test(d.ever, Estimand::rd_pos); });
  emit("observed", "none", Estimand::rr_neg, [&] { return pooled_z_test(d.never, Estimand::rr_neg); });
  emit("observed", "none", Estimand::rd_neg, [&] { return pooled_z_test(d.never, Estimand::rd_neg); });

  const std::array<std::pair<Estimand, Positivity>, 4> corrected{
      std::pair{Estimand::rr_pos, Positivity::ever}, std::pair{Estimand::rd_pos, Positivity::ever},
      std::pair{Estimand::rr_neg, Positivity::never}, std::pair{Estimand::rd_neg, Positivity::never}};

  if (retest) {
    RetestFractions rf{retest->r_event, retest->r_nonevent,
                       retest->basis_event.value_or(d.ever.events_screen),
                       retest->basis_nonevent.value_or(d.ever.nonevents_screen)};
    const OutcomeCounts totals{d.ever.events_control + d.never.events_control,
                               d.ever.nonevents_control + d.never.nonevents_control};
    std::optional<CorrectedColumns> cols;
    std::string why;
    try {
      cols = retest_correct_columns({d.ever.events_control, d.ever.nonevents_control, 0.0, 0.0},
                                    totals, rf);
    } catch (const EstimationError& e) {
      why = e.what();
    }
    for (const auto& [label, which] : corrected) {
      emit("corrected", "retest", label, [&]() -> EstimateResult {
        if (!cols) throw CorrectionUnavailable(why);
        const bool ever = which == Positivity::ever;
        const TwoByTwoTable& t = ever ? d.ever : d.never;
        return column_test({t.events_screen, t.nonevents_screen}, ever ? cols->ever : cols->never, label);
      });
    }
  } else if (has_unknown) {
    for (const auto& [label, which] : corrected) {
      emit("corrected", "compliance", label,
           [&, l = label, w = which] { return compliance_corrected_test(d, w, l); });
    }
  } else {
    for (const auto& [label, which] : corrected) {
      const TwoByTwoTable& t = which == Positivity::ever ? d.ever : d.never;
      emit("corrected", "none", label, [&, l = label] { return pooled_z_test(t, l); });
    }
  }
  return r;
}

}  // namespace ietrial::cli
