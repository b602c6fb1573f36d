#pragma once

#include <stdexcept>
#include <string>

namespace quadrange {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed argument: wrong dimensions, non-finite entries, bad parameter.
struct InvalidInput : Error {
  using Error::Error;
};

// Matrix required to be positive semidefinite has a genuinely negative eigenvalue.
struct NotPsd : Error {
  using Error::Error;
};

// Matrix required to be positive definite is not.
struct NotPd : Error {
  using Error::Error;
};

// Block inversion failed: leading block singular or Schur complement ~ 0.
struct SingularBlock : Error {
  using Error::Error;
};

// A change of variables was requested as invertible but its determinant is ~ 0.
struct SingularTransform : Error {
  using Error::Error;
};

// A solver's structural precondition (definite pencil, strict interior point, ...)
// does not hold for the given instance.
struct HypothesisUnmet : Error {
  using Error::Error;
};

// File missing, unreadable, or not in a recognized format.
struct IoError : Error {
  using Error::Error;
};

}  // namespace quadrange
