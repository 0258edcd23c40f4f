#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace arsjoint {

// Caller broke a documented precondition (wrong shapes, empty inputs, bad ranges).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Input data is well-formed but semantically invalid.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record could not be parsed. Carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace arsjoint
