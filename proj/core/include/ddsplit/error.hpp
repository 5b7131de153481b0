#pragma once

#include <stdexcept>
#include <string>

namespace ddsplit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry, partition, or discretization input.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent problem or algorithm parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/**
 * An iterative or direct inner solver did not reach its tolerance.
 *
 * Carries the last residual measure the solver produced so callers can
 * report how far from convergence it stopped.
 */
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The splitting engine hit a state that the convergence theory excludes
/// (e.g. an empty half-space intersection), which points at a broken oracle.
class AlgorithmError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddsplit
