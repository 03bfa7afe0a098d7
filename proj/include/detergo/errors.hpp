#pragma once

#include <stdexcept>
#include <string>

namespace detergo {

/// Malformed input: a sequence, index, alpha or run specification that
/// violates its schema or a stated precondition.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric contract could not be honoured (degenerate variance, a grid cap
/// hit, insufficient precision for a requested depth).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inequality that holds as a theorem was observed to fail. Carries a
/// human-readable witness.
class InequalityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace detergo
