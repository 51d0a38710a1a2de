#pragma once

#include <stdexcept>
#include <string>

namespace bfree {

// Malformed input or violated precondition. CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two computation routes that must agree exactly did not. CLI exit code 3.
class CrossCheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured cap (subset count, period length, stage, breakpoints) was hit.
// CLI exit code 4.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bfree
