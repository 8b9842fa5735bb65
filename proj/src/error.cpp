#include "ordembed/error.hpp"

namespace ordembed {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kInvalidParameter:
    return "invalid-parameter";
  case ErrorKind::kInvalidInput:
    return "invalid-input";
  case ErrorKind::kDegenerateInput:
    return "degenerate-input";
  case ErrorKind::kParseError:
    return "parse-error";
  case ErrorKind::kStructuralError:
    return "structural-error";
  case ErrorKind::kNumericalError:
    return "numerical-error";
  case ErrorKind::kSolverError:
    return "solver-error";
  case ErrorKind::kDegenerateAlignment:
    return "degenerate-alignment";
  }
  return "error";
}

} // namespace ordembed
