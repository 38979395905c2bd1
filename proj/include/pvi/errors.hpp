#pragma once

#include <stdexcept>
#include <string>

namespace pvi {

// Base class for all library errors. Subtypes exist so the CLI can map
// input/precondition problems to distinct exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (JSON schema, dimensions, empty set).
struct InputError : Error {
  using Error::Error;
};

// Mismatched dimensions between objects that must agree.
struct DimensionError : InputError {
  using InputError::InputError;
};

// A hard combinatorial cap was exceeded (face count, generator enumeration).
struct CapError : Error {
  using Error::Error;
};

// Active-gradient linear independence fails on some nonempty pseudo-face.
struct LicqError : Error {
  using Error::Error;
};

// A certified operation was invoked with unverified or failed premises.
struct PremiseError : Error {
  using Error::Error;
};

}  // namespace pvi
