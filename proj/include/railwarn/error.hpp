#pragma once

#include <stdexcept>
#include <string>

namespace railwarn {

/// Malformed or out-of-schema configuration and input tables.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry that has no defined bearing (transmitter and receiver coincide).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace railwarn
