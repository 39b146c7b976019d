#pragma once

#include <stdexcept>
#include <string>

namespace pof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument's value range was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable vehicle state.
class InvalidState : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class StalledCandidate : public Error {
 public:
  using Error::Error;
};

class AdjustmentTimeout : public Error {
 public:
  using Error::Error;
};

/// Malformed message, illegal session transition or mismatched record lengths.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ManeuverAbort : public Error {
 public:
  using Error::Error;
};

/// Bad CSV header or row; the message names the offending column.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace pof
