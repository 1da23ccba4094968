// ietrial: power, simulation and reproduction tool for intended-effect
// screening trials.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "config.hpp"
#include "ietrial/error.hpp"
#include "report.hpp"
#include "reproduce.hpp"

namespace {

using namespace ietrial;
using namespace ietrial::cli;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::optional<double> alpha;
  std::string out;
  std::string format;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Common& c, bool sim_flags) {
  cmd->add_option("--config", c.config, "JSON run config");
  cmd->add_option("--alpha", c.alpha, "two-sided significance level");
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--format", c.format, "csv or json");
  if (sim_flags) {
    cmd->add_option("--seed", c.seed, "64-bit seed");
    cmd->add_option("--reps", c.reps, "replicates per cell");
    cmd->add_option("--workers", c.workers, "worker threads (results do not depend on it)");
  }
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
  for (SimConfig& cell : cfg.cells) {
    if (c.seed) cell.seed = *c.seed;
    if (c.reps) cell.reps = *c.reps;
    if (c.alpha) cell.alpha = *c.alpha;
    if (c.workers) cell.workers = *c.workers;
  }
  if (!c.out.empty()) cfg.out_path = c.out;
  if (!c.format.empty()) cfg.format = parse_format(c.format);
  return cfg;
}

double alpha_of(const Common& c) {
  const double a = c.alpha.value_or(0.05);
  if (!(a > 0.0 && a < 1.0)) throw ConfigError(fmt::format("alpha must lie in (0, 1) (got {})", a));
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power analysis and simulation for intended-effect screening trials"};
  app.require_subcommand(1);

  Common power_opts, sim_opts, repro_opts, analyze_opts;
  std::optional<double> target_power;
  auto* power = app.add_subcommand("power", "analytic power of the standard and ever-positive analyses");
  add_common(power, power_opts, false);
  power->add_option("--target-power", target_power, "also solve the per-arm size for this power");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo study for each config cell");
  add_common(simulate_cmd, sim_opts, true);

  std::string target;
  int seeds = 1;
  auto* reproduce_cmd = app.add_subcommand("reproduce", "reproduce a published table or figure");
  reproduce_cmd->add_option("target", target, "fig1 fig2 figS1 figS2 figS3 table1a table1b table2a table2b table2c table3")
      ->required();
  add_common(reproduce_cmd, repro_opts, true);
  reproduce_cmd->add_option("--seeds", seeds, "independent seeds averaged per cell");

  std::string input;
  std::string retest;
  auto* analyze = app.add_subcommand("analyze", "estimates from an ever/never/unknown decomposition file");
  analyze->add_option("input", input, "decomposition CSV")->required();
  add_common(analyze, analyze_opts, false);
  analyze->add_option("--retest", retest, "r_event,r_nonevent[,basis_event,basis_nonevent]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (power->parsed()) {
      const RunConfig cfg = load(power_opts);
      emit(power_report(cfg, alpha_of(power_opts), target_power), cfg.format.value_or(Format::csv),
           cfg.out_path);
    } else if (simulate_cmd->parsed()) {
      const RunConfig cfg = load(sim_opts);
      emit(simulate(cfg), cfg.format.value_or(Format::csv), cfg.out_path);
    } else if (reproduce_cmd->parsed()) {
      const Target t = parse_target(target);
      ReproOptions opts;
      if (repro_opts.seed) opts.seed = *repro_opts.seed;
      if (repro_opts.reps) opts.reps = *repro_opts.reps;
      if (repro_opts.workers) opts.workers = *repro_opts.workers;
      if (opts.reps < 1) throw ConfigError("reps must be >= 1");
      opts.alpha = alpha_of(repro_opts);
      opts.seeds = seeds;
      const Format f = repro_opts.format.empty() ? Format::csv : parse_format(repro_opts.format);
      if (t == Target::fig2) {
        std::cerr << "note: trial size for fig2 is not stated; using 50,000 total\n";
      }
      emit(repro_report(reproduce(t, opts)), f, repro_opts.out);
    } else if (analyze->parsed()) {
      std::optional<RetestSpec> spec;
      if (!retest.empty()) spec = parse_retest(retest);
      const TrialDecomposition d = load_decomposition(input);
      const Format f = analyze_opts.format.empty() ? Format::csv : parse_format(analyze_opts.format);
      emit(analyze_report(d, spec), f, analyze_opts.out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const InfeasibleScenario& e) {
    std::cerr << "infeasible scenario: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const EstimationError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
