#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leafgeom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point outside the exterior component {f^2 > 0}, or r <= 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateTriangle : public Error {
 public:
  using Error::Error;
};

class UnsupportedSurface : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class UnsupportedBackend : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ChartError : public Error {
 public:
  using Error::Error;
};

class BoundaryError : public Error {
 public:
  using Error::Error;
};

class SignError : public Error {
 public:
  using Error::Error;
};

class UnknownCheck : public Error {
 public:
  using Error::Error;
};

class NotSpacelike : public Error {
 public:
  NotSpacelike(std::size_t point, const std::string& what)
      : Error(what), point_(point) {}
  std::size_t point() const noexcept { return point_; }

 private:
  std::size_t point_;
};

}  // namespace leafgeom
