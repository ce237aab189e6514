#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand shapes or supports do not match.
struct DimensionError : Error {
  using Error::Error;
};

/// An argument violates a documented precondition (probabilities, ranges...).
struct InvalidArgument : Error {
  using Error::Error;
};

/// An enumeration or LP size limit would be exceeded.
struct CapExceeded : Error {
  using Error::Error;
};

/// A model lost strict positivity where the computation requires it.
struct DegenerateModel : Error {
  using Error::Error;
};

/// A stationary law does not exist or is not unique.
struct StationaryError : Error {
  using Error::Error;
};

/// Internal solver failure (should never happen on valid input).
struct SolverError : Error {
  using Error::Error;
};

/// Time integration left its stability region.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace ergolab
