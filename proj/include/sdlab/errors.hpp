#pragma once

#include <stdexcept>

namespace sdlab {

// Numerical failure during a computation (solver non-convergence, breached
// positivity, excessive rejection, ...). Messages are prefixed with
// "module.operation:" so the CLI can surface the failing site verbatim.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sdlab
