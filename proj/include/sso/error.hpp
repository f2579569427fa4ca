#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sso {

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// out-of-range probability, empty input, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the LIBSVM reader. `line()` is 1-based; 0 means "no particular line".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace sso
