#pragma once

#include <stdexcept>
#include <string>

namespace eotsim {

// Raised by configuration parsing/validation. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a time stepper detects NaN/Inf fields. The CLI maps this to exit code 3.
struct NumericalInstabilityError : std::runtime_error {
  explicit NumericalInstabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eotsim
