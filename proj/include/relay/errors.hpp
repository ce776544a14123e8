#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace relay {

/// Base class for every error raised by the planner library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DegeneratePair : public Error {
 public:
  using Error::Error;
};

class OutOfHull : public Error {
 public:
  using Error::Error;
};

class InfeasibleAllocation : public Error {
 public:
  using Error::Error;
};

class DegenerateProgram : public Error {
 public:
  using Error::Error;
};

/// Schema or value violation in a topology file. `field` names the offending
/// key (dotted path) when known; line/column are 1-based, 0 when unknown.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what, int line = 0, int column = 0)
      : Error(what), field_(std::move(field)), line_(line), column_(column) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

}  // namespace relay
