#pragma once

#include <stdexcept>
#include <string>

namespace mzdual {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: wrong dimensions, invalid probability vectors, bad files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A problem instance exceeds a configured size cap.
class SizeLimitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A point handed to a table lookup lies outside the table's domain.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The LP core could not produce an optimum (infeasible, unbounded, stalled).
class LpError : public Error {
 public:
  using Error::Error;
};

// A table that was required to be concave (or convex) is not.
class NotConcaveError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// The game lies outside the hypotheses the solvers rely on.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class IsaacsViolation : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

class CflViolation : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

// Declared bounds or Lipschitz constants are contradicted by sampling.
class DeclaredBoundError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

}  // namespace mzdual
