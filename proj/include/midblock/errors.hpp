#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace midblock {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A crossing constraint that cannot be honoured even with emergency braking.
class InfeasibleConstraint : public Error {
 public:
  using Error::Error;
};

class MalformedScenario : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonUniformStep : public Error {
 public:
  using Error::Error;
};

// Errors raised while reading a trajectory CSV carry the 1-based line number
// of the offending row (0 when the problem is not tied to a row).
class CsvError : public Error {
 public:
  CsvError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public CsvError {
 public:
  using CsvError::CsvError;
};

class MonotonicityError : public CsvError {
 public:
  using CsvError::CsvError;
};

class ValueError : public CsvError {
 public:
  using CsvError::CsvError;
};

}  // namespace midblock
