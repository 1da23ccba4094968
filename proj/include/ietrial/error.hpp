#pragma once

#include <stdexcept>
#include <string>

namespace ietrial {

// Base for every error raised by the library. The CLI maps the concrete
// types onto exit codes (config 1, infeasible 2, I/O 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimator was asked for something the counts cannot support
// (empty arm, zero control events for a ratio).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Pooled rate is 0 or 1, so the null variance vanishes.
class DegenerateTable : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// A bias correction cannot be formed from the available counts.
class CorrectionUnavailable : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Scenario parameters imply a conditional rate outside [0, 1] or are
// otherwise inconsistent.
class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or input document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ietrial
