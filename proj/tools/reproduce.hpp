#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ietrial/simulator.hpp"
#include "report.hpp"

namespace ietrial::cli {

enum class Target { fig1, fig2, figS1, figS2, figS3, table1a, table1b, table2a, table2b, table2c, table3 };

std::string_view to_string(Target t);
Target parse_target(std::string_view name);  // throws ConfigError
std::vector<Target> all_targets();

struct ReproOptions {
  std::uint64_t seed = 20240501;
  std::int64_t reps = 10000;
  int seeds = 1;  // independent runs (seed, seed + 1, ...) averaged per cell
  double alpha = 0.05;
  unsigned workers = 0;
};

struct ReproRow {
  std::string target;
  std::string row;
  std::string quantity;
  std::optional<double> reproduced;
  std::optional<double> published;
  std::optional<double> tolerance;
  std::optional<bool> pass;  // empty when there is nothing to compare
  std::string note;
};

std::vector<ReproRow> reproduce(Target target, const ReproOptions& opts);

Report repro_report(const std::vector<ReproRow>& rows);

// Average of independent runs of the same cell (equal reps each).
SimSummary run_seeds(SimConfig cfg, const ReproOptions& opts);

// max(0.02, 3 Monte Carlo standard errors) for a rate estimated from n
// replicates.
double rate_tolerance(double p, std::int64_t n);

}  // namespace ietrial::cli
