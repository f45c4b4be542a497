#pragma once

#include <stdexcept>
#include <string>

namespace dsekit {

/// A matrix expected to be positive definite had a nonpositive pivot.
/// Usually a symptom of filter divergence upstream.
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A state vector picked up an inf/nan during integration or filtering.
struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solve (equilibrium search) exhausted its iteration budget.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Innovation covariance S = Pyy + R is not invertible.
struct SingularInnovation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (missing directory, unwritable path, ...).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_arg)
      : std::runtime_error(what + " (line " + std::to_string(line_arg) + ")"),
        line(line_arg) {}
  int line;
};

/// Two series that must be aligned have different lengths.
struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace dsekit
