#pragma once

#include <stdexcept>
#include <string>

namespace causim {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Assignment has the wrong arity or an out-of-range symbol.
class InvalidAssignmentError : public Error {
 public:
  using Error::Error;
};

// The same variable appears more than once in an evidence list,
// or carries both a conditioned and an intervened value.
class DuplicateEvidenceError : public Error {
 public:
  using Error::Error;
};

// The conditioning event has probability zero. Distinct from invalid
// input: the evidence is well-formed but cannot be normalized on.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration would exceed the configured assignment cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A process or its inputs violate a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Process-spec text could not be parsed; message carries line/column.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace causim
