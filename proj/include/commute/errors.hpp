#pragma once

#include <stdexcept>
#include <string>

namespace commute {

/// Caller passed arguments that violate an operation's preconditions
/// (domain mismatch, wrong field count, bad parameter range).
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed FGRID / VOXSET / JSON input.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The collapse map could not be constructed (retries exhausted, capsule
/// invariant violated, ...).
class ConstructionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace commute
