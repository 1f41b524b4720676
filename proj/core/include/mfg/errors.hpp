#pragma once

#include <stdexcept>

namespace mfg {

/// Base type for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally invalid input: shapes, lengths, symmetry, schema.
struct InvalidInput : Error {
  using Error::Error;
};

/// A mathematical precondition of the requested operation does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

/// An iterative computation diverged or failed to converge.
struct DivergenceError : Error {
  using Error::Error;
};

struct NotSymmetric : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct BadLength : InvalidInput {
  using InvalidInput::InvalidInput;
};
struct DimMismatch : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct Unstable : PreconditionError {
  using PreconditionError::PreconditionError;
};
struct NotContraction : PreconditionError {
  using PreconditionError::PreconditionError;
};
struct CholeskyFailure : PreconditionError {
  using PreconditionError::PreconditionError;
};
struct SingularSolve : PreconditionError {
  using PreconditionError::PreconditionError;
};
struct RiccatiFailure : PreconditionError {
  using PreconditionError::PreconditionError;
};

struct NoConvergence : DivergenceError {
  using DivergenceError::DivergenceError;
};
struct NonFinite : DivergenceError {
  using DivergenceError::DivergenceError;
};
struct UnstableIterate : DivergenceError {
  using DivergenceError::DivergenceError;
};

}  // namespace mfg
