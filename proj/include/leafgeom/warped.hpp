#pragma once

#include "leafgeom/base2d.hpp"
#include "leafgeom/types.hpp"

#include <array>
#include <functional>

namespace leafgeom {

// Coordinate chart on the fiber. The sphere uses two polar charts, one with
// its axis along z and one along x, so every point is far from the poles of
// at least one of them.
enum class FiberChart { SpherePolarZ, SpherePolarX, Flat };

// Ambient coordinates (t, r, x1, x2) in the given fiber chart.
struct AmbientPoint {
  Vec4 coords = Vec4(0.0, 1.0, 0.0, 0.0);
  FiberChart chart = FiberChart::Flat;

  BasePoint base() const { return {coords(0), coords(1)}; }
  Vec2 fiber() const { return coords.tail<2>(); }
};

Mat2 fiber_metric(FiberChart chart, const Vec2& x);
// Γ^k_ij of g_F in closed form: result[k](i, j).
std::array<Mat2, 2> fiber_christoffel(FiberChart chart, const Vec2& x);

// Sphere chart helpers.
Vec2 sphere_chart_coords(FiberChart chart, const Vec3& unit_point);
Vec3 sphere_chart_point(FiberChart chart, const Vec2& coords);
FiberChart best_sphere_chart(const Vec3& unit_point);

Mat4 ambient_metric(const Profile& prof, const AmbientPoint& p);

// gamma[k](i, j) = Γ^k_ij in the ambient coordinates.
struct Christoffel {
  std::array<Mat4, 4> gamma{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};

  // Γ(X, Y)^k = Γ^k_ij X^i Y^j
  Vec4 contract(const Vec4& x, const Vec4& y) const;
};

// Levi-Civita connection of the warped product assembled from the base
// connection, the warping gradient and the fiber connection.
Christoffel closed_christoffel(const Profile& prof, const AmbientPoint& p);

// ∇̃_X Y for a vector field germ Y with value y and directional derivative
// of its components dy_along_x = X(Y^k) at the point.
Vec4 closed_covderiv(const Profile& prof, const AmbientPoint& p, const Vec4& x, const Vec4& y,
                     const Vec4& dy_along_x);

struct OracleOptions {
  double step = 1e-3;
};

// Christoffel symbols from fourth-order central differences of ambient_metric.
// Shares no code with closed_christoffel. Throws BoundaryError when the
// stencil would leave the domain or come within reach of a chart pole.
Christoffel oracle_christoffel(const Profile& prof, const AmbientPoint& p,
                               const OracleOptions& opt = {});

// Largest entry difference between the oracle at step and at step / 2.
double oracle_richardson_gap(const Profile& prof, const AmbientPoint& p,
                             const OracleOptions& opt = {});

Vec4 oracle_covderiv(const Profile& prof, const AmbientPoint& p, const Vec4& x, const Vec4& y,
                     const Vec4& dy_along_x, const OracleOptions& opt = {});

double ambient_inner(const Profile& prof, const AmbientPoint& p, const Vec4& a, const Vec4& b);

// Coordinate vector field: maps ambient coordinates to components.
using VectorFieldFn = std::function<Vec4(const Vec4&)>;

// Directional derivative X(Y^k) of a vector field by central differences.
Vec4 directional_derivative(const VectorFieldFn& field, const Vec4& at, const Vec4& along,
                            double step = 1e-4);

// g̃([E1, E2], ξ) with the bracket taken by finite differences. Vanishes when
// both fields lie in the distribution orthogonal to ξ.
double involutivity_residual(const Profile& prof, const AmbientPoint& p, const VectorFieldFn& e1,
                             const VectorFieldFn& e2, double step = 1e-4);

// Lifts of the lightlike frame as ambient fields.
VectorFieldFn xi_field(const Profile& prof);
VectorFieldFn eta_field(const Profile& prof);

}  // namespace leafgeom
