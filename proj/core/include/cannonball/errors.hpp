#pragma once

#include <stdexcept>
#include <string>

namespace cannonball {

/// A parameter is outside the supported range (k cap, odd L, precision too
/// low for the requested harmonic, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A fit or estimate was asked for with too few usable points.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cannonball
