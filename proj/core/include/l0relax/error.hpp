#pragma once

#include <stdexcept>
#include <string>

namespace l0relax {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input shapes disagree (vector length vs. matrix dimension, ragged rows).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-finite input data.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be positive definite is not (Cholesky pivot <= 0,
/// or the smallest eigenvalue is below the definiteness tolerance).
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be positive semidefinite has an eigenvalue below -tol.
class NotPsd : public Error {
 public:
  using Error::Error;
};

/// Proximal step violates step * delta < 1.
class StepTooLarge : public Error {
 public:
  using Error::Error;
};

/// delta does not satisfy G - diag(delta) >= 0.
class NotAdmissible : public Error {
 public:
  using Error::Error;
};

/// An operation that needs a ridge weight was given mu = 0.
class MuZero : public Error {
 public:
  using Error::Error;
};

/// Problem exceeds the hard size cap of an exhaustive method.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit an unrecoverable factorization breakdown.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Bad command line or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace l0relax
