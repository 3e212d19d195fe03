#pragma once

#include <stdexcept>
#include <string>

namespace khintchine {

// Every failure the library reports derives from Error. The CLI maps
// ResourceError to exit code 3 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that are inconsistent with each other (mismatched bases, a
// mass method the measure model cannot serve, malformed config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A value that exists but cannot be represented by the requested path
// (e.g. a term too large to materialize as a machine integer).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition (precision budget, s_cap, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Memory or time budget would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace khintchine
