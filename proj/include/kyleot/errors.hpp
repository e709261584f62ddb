#pragma once

#include <stdexcept>
#include <string>

namespace kyleot {

// Thrown when the terminal signal variance vanishes and the linear market
// has no price-relevant information to transport.
struct DegenerateSignalError : std::runtime_error {
  explicit DegenerateSignalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when the activist coupling is not invertible (sigma_beta == 0).
struct SingularMapError : std::runtime_error {
  explicit SingularMapError(const std::string& msg) : std::runtime_error(msg) {}
};

// A closed-form precondition (positive filter covariance, positive gain
// denominator) fails at the requested time.
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Quadrature or a user callback produced a non-finite value.
struct GrowthViolationError : std::runtime_error {
  explicit GrowthViolationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Particle filter weights collapsed below the usable threshold.
struct FilterDegeneracyError : std::runtime_error {
  explicit FilterDegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulated state turned non-finite; carries the offending step index.
struct SimulationBlowupError : std::runtime_error {
  int step;
  SimulationBlowupError(const std::string& msg, int step_index)
      : std::runtime_error(msg + " at step " + std::to_string(step_index)), step(step_index) {}
};

}  // namespace kyleot
