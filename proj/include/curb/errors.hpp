#pragma once

#include <stdexcept>
#include <string>

namespace curb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A timestamp or index falls outside the valid span.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Geometry that admits no meaningful answer (collinear points, empty hulls).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Tensor or grid shapes that must agree do not.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Two rasters were built on different grid specifications.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Crop region larger than the source raster.
class RegionTooLarge : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN or infinite loss.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

/// Malformed file or record on read.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace curb
