#pragma once

#include <stdexcept>
#include <string>

namespace heis {

// Bad input: wrong dimensions, out-of-range parameters, malformed files.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// The computation itself failed: singular system, ellipticity failure,
// non-convergence. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace heis
