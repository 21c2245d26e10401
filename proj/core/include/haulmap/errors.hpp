#pragma once

#include <stdexcept>
#include <string>

namespace haulmap {

// Exit codes used by the command line tool. Library code throws the exception
// types below; the CLI maps them onto these codes.
enum class ExitCode : int {
  ok = 0,
  bad_arguments = 2,
  parse_error = 3,
  invariant_violation = 4,
  non_convergence = 5,
};

// Malformed external input (CSV row, config line, GeoJSON document).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// A documented precondition or structural invariant was violated.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace haulmap
