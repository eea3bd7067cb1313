#pragma once

#include <stdexcept>
#include <string>

namespace perseval {

/// Input data is malformed, inconsistent, or missing something a computation needs.
/// The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferentialError : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateKeyError : public DataError {
 public:
  using DataError::DataError;
};

/// A numeric precondition failed (degenerate variance, invalid distribution, ...).
/// The CLI maps this family to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace perseval
