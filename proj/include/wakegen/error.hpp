#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wakegen {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problem in an input stream, tied to a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Header row lacks a required column.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Bad configuration value, missing input file, or invalid option combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class HierarchyError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

// Numerical precondition violated (degenerate noise base rate, undefined threshold, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace wakegen
