#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Bad shapes, out-of-range ranks, invalid parameters.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was asked for outside the set where it is defined
/// (e.g. the tangent curve at the zero matrix).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A matrix whose numerical rank exceeds the rank bound.
class InfeasiblePointError : public ArgumentError {
public:
  using ArgumentError::ArgumentError;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Backtracking exhausted its budget. `last_alpha` is the last step size
/// tried; `candidate` is the rank-reduction depth j when raised from the
/// search function, -1 otherwise.
class LineSearchFailure : public std::runtime_error {
public:
  LineSearchFailure(const std::string &what, double last_alpha,
                    int candidate = -1)
      : std::runtime_error(what), last_alpha(last_alpha),
        candidate(candidate) {}

  double last_alpha;
  int candidate;
};

} // namespace lowrank
