#pragma once

#include <stdexcept>
#include <string>

namespace hlpe {

// Bad input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation left its numerical contract. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Mean resultant length below 1e-12: the Holevo deviation is not representable.
class DeviationOverflow : public NumericError {
 public:
  explicit DeviationOverflow(const std::string& what) : NumericError(what) {}
};

}  // namespace hlpe
