#pragma once

#include <stdexcept>
#include <string>

namespace apd {

/// Raised for invalid user input: bad configs, malformed model files,
/// out-of-vocabulary ids. The CLI maps it to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a distribution has no finite entry left.
class DegenerateDistribution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an enumeration would exceed the table-size guard.
class TooLargeToEnumerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apd
