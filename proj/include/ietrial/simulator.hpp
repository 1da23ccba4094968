#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "ietrial/mechanisms.hpp"
#include "ietrial/rng.hpp"
#include "ietrial/scenario.hpp"
#include "ietrial/tables.hpp"

namespace ietrial {

struct SimConfig {
  TrialScenario scenario;
  std::optional<SamplingPlan> sampling;
  std::optional<DegradationModel> degradation;
  bool retest_correction = false;
  std::optional<NonComplianceModel> noncompliance;
  bool compliance_correction = false;
  std::int64_t reps = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  unsigned workers = 0;  // 0 = hardware concurrency; never changes results

  /// Throws ConfigError for inconsistent settings, InfeasibleScenario for
  /// a scenario whose rates fall outside [0, 1].
  void validate() const;
  bool corrected() const { return retest_correction || compliance_correction; }
};

struct SimSummary {
  std::int64_t reps = 0;
  double mean_rr_pos = 0.0;
  double mean_rr_neg = 0.0;
  std::optional<double> mean_corrected_rr_pos;
  std::optional<double> mean_corrected_rr_neg;
  double power_standard = 0.0;
  double power_rr_pos = 0.0;
  std::optional<double> power_corrected_rr_pos;
  double alpha_rr_neg = 0.0;  // rejection rate of the RR_neg = 1 test
  std::optional<double> alpha_corrected_rr_neg;
  std::int64_t degenerate_reps = 0;
  double monte_carlo_se_power = 0.0;  // of power_rr_pos

  friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

/// One simulated trial: ever-positive counts ~ Binomial(n_arm, p_m), then
/// events ~ Binomial in each arm x positivity cell. Unknown table zero.
TrialDecomposition simulate_decomposition(const TrialScenario& s, Rng& rng);

/// Estimates and tests of one replicate. A missing value means the
/// estimand was degenerate (or not requested) in this replicate.
struct ReplicateResult {
  bool reject_standard = false;
  std::optional<EstimateResult> rr_pos;
  std::optional<EstimateResult> rr_neg;
  std::optional<EstimateResult> corrected_rr_pos;
  std::optional<EstimateResult> corrected_rr_neg;
  bool degenerate = false;
};

/// Runs replicate `index` of the study (mechanisms layered as
/// non-compliance, degradation, subsampling).
ReplicateResult run_replicate(const SimConfig& cfg, std::uint64_t index);

/// All replicates, aggregated in index order.
SimSummary run_study(const SimConfig& cfg);

enum class NullTarget { rr_neg, corrected_rr_neg };

/// Rejection rate of the RR_neg = 1 test (observed or corrected).
/// Requires scenario.rr_neg == 1.
double estimate_type1_error(const SimConfig& cfg, NullTarget target);

}  // namespace ietrial
