#pragma once

#include <stdexcept>
#include <string>

namespace gradobs {

/// Invalid scenario or sensor configuration: bad geometry, malformed JSON,
/// unknown keys, values outside their admissible range.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Gain synthesis was asked for a sensor set that cannot see every unstable
/// cluster (rank deficiency or too few sensors).
struct NotStrategicError : std::runtime_error {
  explicit NotStrategicError(const std::string& what) : std::runtime_error(what) {}
};

/// Explicit time stepping was requested with a step size outside the stability
/// region of the retained dynamics. Reported, never silently clipped.
struct IntegratorError : std::runtime_error {
  explicit IntegratorError(const std::string& what) : std::runtime_error(what) {}
};

/// A dense solve or eigenvalue placement failed to reach its verified tolerance.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gradobs
