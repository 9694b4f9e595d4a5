#pragma once

#include <stdexcept>
#include <string>

namespace eon {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or value.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller (bad argument, unknown id).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A destination cannot be reached from its source.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// Physical model evaluated outside its domain (e.g. overlapping channels).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An optimization stage has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// The convex solver failed for numerical reasons.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace eon
