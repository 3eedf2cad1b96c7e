#ifndef RANKFORGE_ERROR_HPP
#define RANKFORGE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rankforge {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files (LETOR lines, model files, ...).
struct ParseError : Error {
  using Error::Error;
};

// Invalid or incompatible configuration detected before any compute.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite values encountered during numeric evaluation. Carries the
// parameter vector at the point of failure when available.
struct NumericError : Error {
  explicit NumericError(const std::string& what, std::vector<double> at = {})
      : Error(what), params(std::move(at)) {}
  std::vector<double> params;
};

}  // namespace rankforge

#endif  // RANKFORGE_ERROR_HPP
