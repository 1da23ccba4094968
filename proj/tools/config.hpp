#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ietrial/simulator.hpp"
#include "report.hpp"

namespace ietrial::cli {

// A run-config document after sweep expansion: one SimConfig per
// combination of array-valued fields (first field varies slowest).
struct RunConfig {
  std::vector<SimConfig> cells;
  std::string out_path;
  std::optional<Format> format;
};

// Throws ConfigError on malformed documents, unknown keys or out-of-range
// probabilities. Feasibility is not checked here.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// A config with a single default cell (the Figure 1 scenario).
RunConfig default_config();

}  // namespace ietrial::cli
