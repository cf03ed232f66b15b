#pragma once

#include <Eigen/Dense>

#include <vector>

namespace leafgeom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Per-point real values over a fiber discretization.
using ScalarField = std::vector<double>;

// (t, r) coordinates on the base.
struct BasePoint {
  double t = 0.0;
  double r = 1.0;
};

// Components along (d/dt, d/dr).
struct BaseVector {
  double a_t = 0.0;
  double a_r = 0.0;

  BaseVector operator+(const BaseVector& o) const { return {a_t + o.a_t, a_r + o.a_r}; }
  BaseVector operator-(const BaseVector& o) const { return {a_t - o.a_t, a_r - o.a_r}; }
  BaseVector operator*(double s) const { return {s * a_t, s * a_r}; }
  double operator()(int i) const { return i == 0 ? a_t : a_r; }
};

// Components of a 1-form on the base in (dt, dr).
struct BaseCovector {
  double w_t = 0.0;
  double w_r = 0.0;

  double operator()(const BaseVector& x) const { return w_t * x.a_t + w_r * x.a_r; }
};

}  // namespace leafgeom
