#pragma once

#include <stdexcept>
#include <string>

namespace bifl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Lagrangian density was evaluated outside its real domain.
class InfeasiblePointError : public Error {
 public:
  using Error::Error;
};

/// An operation was called with a model it is not defined for.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Precondition on inputs violated (grid shape, source placement, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A property that must hold by construction was found violated.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace bifl
