#pragma once

#include <stdexcept>
#include <string>

namespace owdet {

// Error categories. The CLI maps each to a distinct exit code; library
// callers can catch the base type or a specific category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem problems: missing files, unreadable/unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input content (bad JSON, wrong field types, dangling ids).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Arguments outside their documented domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A data-structure invariant was violated; signals an upstream pipeline bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace owdet
