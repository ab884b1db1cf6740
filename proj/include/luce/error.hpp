#pragma once

#include <stdexcept>
#include <string>

namespace luce {

/// Input violates an operation's contract (bad dimension, invalid label,
/// unnormalized weights where normalized ones are required).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well formed but outside the hypothesis of a result, e.g. a
/// weight above 1/2 handed to the d-infinity bound.
class PreconditionViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not meet its tolerance, or a linear system
/// that must be nonsingular was not.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace luce
