#pragma once

#include <stdexcept>
#include <string>

namespace badband {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad headers, truncated payloads,
/// out-of-range indices, invalid configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must agree on band or pixel count do not.
class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// The numerics could not be carried through (ridge escalation exhausted,
/// every candidate target degenerate).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The target signature coincides with the background mean, so the matched
/// filter is undefined. Callers that sample targets resample on this.
class DegenerateTargetError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace badband
