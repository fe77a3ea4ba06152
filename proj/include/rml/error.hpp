#pragma once

#include <stdexcept>
#include <string>

namespace rml {

/// Bad input: violated precondition, malformed config, unknown option.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (non-convergence, singular system, degenerate moments).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rml
