#pragma once

#include <stdexcept>
#include <string>

namespace concdiam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed definition document (not JSON, wrong shape, wrong field type).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed input that violates a type invariant. The message names the
/// violated invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the domain of an operation (p <= 1, negative widths...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused because the atom count exceeds the cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// certify_bounds refused to run because the statistic failed its Lipschitz check.
class CertificationRefused : public Error {
 public:
  using Error::Error;
};

/// Should not happen for valid inputs; indicates a solver defect.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace concdiam
