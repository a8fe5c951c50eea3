#pragma once

#include <stdexcept>
#include <string>

namespace holonic {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A particle measure violated its invariants (empty support, non-finite
// values, weights not summing to one, ...).
struct InvalidMeasureError : Error {
  using Error::Error;
};

// Mixed particle/moment beliefs, or an argument outside its domain.
struct InvalidArgumentError : Error {
  using Error::Error;
};

// A numeric evaluation produced a non-finite value. Carries the holon
// index when one is known (-1 otherwise).
struct NumericError : Error {
  int holon = -1;
  NumericError(const std::string& msg, int holon_index = -1)
      : Error(msg), holon(holon_index) {}
};

// Closed-form machinery was asked for a regime it does not cover
// (e.g. an equilibrium with clipped actions).
struct UnsupportedRegimeError : Error {
  using Error::Error;
};

// Configuration file or parameter-range failure.
struct ConfigError : Error {
  using Error::Error;
};

// An iterative solver ran out of iterations. Carries the last distance.
struct NonConvergenceError : Error {
  double final_distance = 0.0;
  NonConvergenceError(const std::string& msg, double distance)
      : Error(msg), final_distance(distance) {}
};

}  // namespace holonic
