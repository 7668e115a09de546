#pragma once

#include <stdexcept>
#include <string>

namespace vbs {

/// Bad input: violated precondition, unsupported geometry, malformed file.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation ran but did not produce a trustworthy result
/// (non-convergence, rank deficiency, failed statistical guard).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vbs
