#pragma once

#include <stdexcept>
#include <string>

namespace liangyi {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (validation 1, runtime 2, capacity 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or membership violations: mismatched dimensions, empty sets,
// member not found.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Configuration values outside their declared ranges.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An exact oracle was asked for an instance larger than it supports.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Numerically undefined requests, e.g. a PEO against a zero optimum.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Cached state disagrees with what the caller expects (memory records,
// memo fingerprints).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace liangyi
