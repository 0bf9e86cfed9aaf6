#pragma once

#include <stdexcept>
#include <string>

namespace fgpc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array or layout shape does not match what an operation expects.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (negative tolerance, unsupported family, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A residual evaluation produced NaN or Inf.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// The adaptive integrator could not make progress.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// No periodic motion could be detected in a trajectory.
class PeriodicityError : public Error {
public:
    using Error::Error;
};

/// Numerical linear algebra failure.
class LinearAlgebraError : public Error {
public:
    using Error::Error;
};

} // namespace fgpc
