#pragma once

#include <stdexcept>
#include <string>

namespace compdyn {

// Bad input: malformed config, inconsistent sizes, out-of-domain parameters.
// The CLI maps this to exit status 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: step underflow, non-convergence, singular systems.
// The CLI maps this to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace compdyn
