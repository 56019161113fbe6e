#pragma once

#include <stdexcept>
#include <string>

namespace mssrk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad tableau, dimension mismatch, invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The implicit stage solve failed (no convergence, singular system, NaN).
class SolverError : public Error {
 public:
  SolverError(std::string const& what, double final_residual, int iterations)
      : Error(what + " (residual " + std::to_string(final_residual) +
              ", iterations " + std::to_string(iterations) + ")"),
        final_residual_(final_residual),
        iterations_(iterations) {}

  double final_residual() const { return final_residual_; }
  int iterations() const { return iterations_; }

 private:
  double final_residual_;
  int iterations_;
};

}  // namespace mssrk
