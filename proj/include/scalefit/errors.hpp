#pragma once

#include <stdexcept>
#include <string>

namespace scalefit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text; message carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class InvalidParallelismError : public Error {
 public:
  using Error::Error;
};

class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

class InvalidHorizonError : public Error {
 public:
  using Error::Error;
};

}  // namespace scalefit
