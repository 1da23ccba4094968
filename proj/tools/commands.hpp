#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "ietrial/mechanisms.hpp"
#include "ietrial/simulator.hpp"
#include "report.hpp"

namespace ietrial::cli {

// Analytic power per scenario cell; with a target power also the per-arm
// sizes the two analyses need.
Report power_report(const RunConfig& cfg, double alpha, std::optional<double> target_power);

// Column names of `simulate` output, in order.
std::vector<std::string> simulate_columns();
Report simulate_report(const std::vector<SimConfig>& cells, const std::vector<SimSummary>& results);

// Runs every cell of the config.
Report simulate(const RunConfig& cfg);

// Reads the decomposition CSV (table,events_screen,nonevents_screen,
// events_control,nonevents_control). Throws ConfigError with line/column
// diagnostics.
TrialDecomposition read_decomposition(std::istream& in);
TrialDecomposition load_decomposition(const std::string& path);

// "r_event,r_nonevent" or "r_event,r_nonevent,basis_event,basis_nonevent".
// Without a basis the screen-arm ever-positive counts are used.
struct RetestSpec {
  double r_event = 1.0;
  double r_nonevent = 1.0;
  std::optional<double> basis_event;
  std::optional<double> basis_nonevent;
};
RetestSpec parse_retest(const std::string& text);

Report analyze_report(const TrialDecomposition& d, const std::optional<RetestSpec>& retest);

}  // namespace ietrial::cli
