#pragma once

#include <stdexcept>
#include <string>

namespace qmclock {

/// Invalid physical setup or malformed sweep/CLI input.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Base for numerical failures. The CLI maps these to exit code 3.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluation landed on a channel or mode threshold (q = 0 or k± = 0), where
/// the region matrices are singular.
class ThresholdError : public SolverError {
public:
  using SolverError::SolverError;
};

/// No interior maximum inside the central-lobe bracket.
class BracketError : public SolverError {
public:
  using SolverError::SolverError;
};

/// A half-height crossing of the central fringe is missing.
class CrossingError : public SolverError {
public:
  using SolverError::SolverError;
};

/// Iterative refinement (Richardson, adaptive stepping) did not converge.
class ConvergenceError : public SolverError {
public:
  using SolverError::SolverError;
};

}  // namespace qmclock
