#pragma once

// Data-parallel per-point kernels. Each kernel has an OpenMP version and a
// serial reference in kernels::reference that is kept for testing and
// benchmarking. Both produce the same values up to floating-point summation
// order.

#include "leafgeom/fiber.hpp"
#include "leafgeom/warped.hpp"

#include <span>
#include <vector>

namespace leafgeom::kernels {

// y = K s with K the cotan stiffness (row gather over the assembled matrix).
ScalarField stiffness_apply(const TriMesh& mesh, std::span<const double> s);

// Area-weighted vertex average of per-triangle gradients of the piecewise
// linear interpolant, in the vertex tangent basis.
std::vector<Vec2> vertex_gradients(const TriMesh& mesh, std::span<const double> s);

GridDerivatives grid_derivatives(const ChartGrid& grid, std::span<const double> s);

// Second fundamental form of the graph x -> (u(x), v(x), x) over a chart grid,
// from ambient Christoffels by finite differences of the metric. II[k] holds
// II(e0,e0), II(e0,e1), II(e1,e1) in ambient coordinate components.
struct SecondFormField {
  std::vector<std::array<Vec4, 3>> II;
  std::vector<Vec4> H;
  std::vector<Mat2> metric;  // induced metric in chart components
};

SecondFormField oracle_second_form(const Profile& prof, const ChartGrid& grid, FiberChart chart,
                                   std::span<const double> u, std::span<const double> v,
                                   const GridDerivatives& du, const GridDerivatives& dv,
                                   const OracleOptions& opt);

namespace reference {

SecondFormField oracle_second_form(const Profile& prof, const ChartGrid& grid, FiberChart chart,
                                   std::span<const double> u, std::span<const double> v,
                                   const GridDerivatives& du, const GridDerivatives& dv,
                                   const OracleOptions& opt);

// Triangle scatter, no assembled matrix.
ScalarField stiffness_apply(const TriMesh& mesh, std::span<const double> s);
std::vector<Vec2> vertex_gradients(const TriMesh& mesh, std::span<const double> s);
GridDerivatives grid_derivatives(const ChartGrid& grid, std::span<const double> s);

}  // namespace reference

// Gradient of the linear interpolant on triangle t, as an ambient 3-vector.
Vec3 triangle_gradient(const TriMesh& mesh, std::size_t t, std::span<const double> s);

}  // namespace leafgeom::kernels
