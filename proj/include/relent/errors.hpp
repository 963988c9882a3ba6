#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relent {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller broke an API contract (rank mismatch, bad argument, out-of-range mode).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Invalid or inconsistent run configuration; message names the offending key.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Operation not defined in the requested dimension (e.g. Helmholtz projection
/// of a nonconstant 1D field).
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Density dropped below the configured floor. Carries the simulation time and
/// the flat cell index of the first offending cell.
class PositivityError : public Error {
  public:
    PositivityError(double t, std::size_t cell, double value)
        : Error("density positivity breach at t=" + std::to_string(t) + ", cell " +
                std::to_string(cell) + ", value " + std::to_string(value)),
          t(t), cell(cell), value(value) {}
    double t;
    std::size_t cell;
    double value;
};

/// Nonzero momentum or noise coefficient on a vacuum cell.
class VacuumError : public Error {
  public:
    using Error::Error;
};

/// Nonfinite value appeared during time stepping.
class DivergenceError : public Error {
  public:
    DivergenceError(double t, long step)
        : Error("nonfinite value at t=" + std::to_string(t) + ", step " + std::to_string(step)),
          t(t), step(step) {}
    double t;
    long step;
};

/// Frozen time step exceeded the hard CFL limit of the current state.
class StabilityError : public Error {
  public:
    using Error::Error;
};

/// Reference process left its declared density bounds.
class ReferenceBoundError : public Error {
  public:
    using Error::Error;
};

/// Numerically computed coercivity constant came out nonpositive.
class CoercivityError : public Error {
  public:
    using Error::Error;
};

/// Twin runs were asked to couple on mismatched time grids.
class CouplingError : public Error {
  public:
    using Error::Error;
};

/// Ensemble reduction over misaligned ledgers.
class ReductionError : public Error {
  public:
    using Error::Error;
};

/// Snapshot / checkpoint file problems.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace relent
