#ifndef ROADSEG_ERRORS_HPP
#define ROADSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roadseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Tensor/weight dimension mismatches.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid or incomplete run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Geometrically undefined requests (direction of the origin point,
// contour with no usable vertex).
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace roadseg

#endif  // ROADSEG_ERRORS_HPP
