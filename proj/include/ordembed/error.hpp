#pragma once

#include <stdexcept>
#include <string>

namespace ordembed {

enum class ErrorKind {
  kInvalidParameter,
  kInvalidInput,
  kDegenerateInput,
  kParseError,
  kStructuralError,
  kNumericalError,
  kSolverError,
  kDegenerateAlignment,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string &detail() const noexcept { return detail_; }

private:
  ErrorKind kind_;
  std::string detail_;
};

// Shorthand used across the library for precondition checks.
inline void require(bool cond, ErrorKind kind, const std::string &what) {
  if (!cond)
    throw Error(kind, what);
}

} // namespace ordembed
