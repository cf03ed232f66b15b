#pragma once

#include "leafgeom/types.hpp"

#include <Eigen/Sparse>

#include <array>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace leafgeom {

enum class SurfaceKind { Sphere, Torus };
enum class Backend { TriMesh, ChartGrid };

struct FiberDescriptor {
  Backend backend = Backend::TriMesh;
  SurfaceKind surface = SurfaceKind::Sphere;
  int level = 3;         // icosphere subdivision level
  double radius = 1.0;   // sphere radius
  int n = 32;            // torus mesh is n x n
  int rows = 65;         // chart grid nodes along the first coordinate
  int cols = 128;        // chart grid nodes along the second (periodic) coordinate
  double theta_min = 0.35;
  double theta_max = std::numbers::pi - 0.35;
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Closed triangulated surface. Sphere vertices lie on the sphere of the given
// radius; torus vertices are (a, b, 0) with a, b in [0, 2π) and the flat metric.
class TriMesh {
 public:
  static TriMesh icosphere(int level, double radius = 1.0);
  static TriMesh flat_torus(int n);

  SurfaceKind surface() const { return surface_; }
  double radius() const { return radius_; }
  std::size_t size() const { return positions_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const std::vector<Vec3>& positions() const { return positions_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  // Corner positions of a triangle, unwrapped across the torus seams.
  const std::array<Vec3, 3>& corners(std::size_t t) const { return corners_[t]; }
  const std::vector<double>& triangle_areas() const { return areas_; }
  // Cotangents of the angle at each corner.
  const std::array<double, 3>& cotangents(std::size_t t) const { return cot_[t]; }
  // Orthonormal tangent basis at each vertex.
  const std::array<Vec3, 2>& tangent_basis(std::size_t i) const { return basis_[i]; }
  Vec3 normal(std::size_t i) const;

  // Mixed Voronoi lumped mass.
  const std::vector<double>& mass() const { return mass_; }
  // Cotan stiffness, positive semidefinite, rows sum to zero.
  const SparseRowMatrix& stiffness() const { return stiffness_; }
  // Triangles incident to each vertex, with the local corner index.
  const std::vector<std::vector<std::pair<int, int>>>& vertex_triangles() const {
    return incident_;
  }

 private:
  void finalize();

  SurfaceKind surface_ = SurfaceKind::Sphere;
  double radius_ = 1.0;
  std::vector<Vec3> positions_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<Vec3, 3>> corners_;
  std::vector<double> areas_;
  std::vector<std::array<double, 3>> cot_;
  std::vector<std::array<Vec3, 2>> basis_;
  std::vector<double> mass_;
  SparseRowMatrix stiffness_;
  std::vector<std::vector<std::pair<int, int>>> incident_;
};

// First and second partial derivatives of a grid function.
struct GridDerivatives {
  ScalarField d0, d1, d00, d01, d11;
};

// Structured chart grid. Sphere band: coordinates (θ, φ) with θ in
// [theta_min, theta_max] (inclusive, non-periodic) and φ periodic.
// Torus: (a, b) both periodic on [0, 2π).
class ChartGrid {
 public:
  static ChartGrid sphere_band(int rows, int cols, double theta_min, double theta_max);
  static ChartGrid torus(int rows, int cols);

  SurfaceKind surface() const { return surface_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols_ + j; }
  bool periodic_rows() const { return surface_ == SurfaceKind::Torus; }
  double h0() const { return h0_; }
  double h1() const { return h1_; }
  double theta_min() const { return start0_; }
  double theta_max() const { return start0_ + (rows_ - 1) * h0_; }

  Vec2 coord(std::size_t k) const;
  Mat2 baseline_metric(std::size_t k) const;
  // Distance (in rows) to the nearest non-periodic edge; large for the torus.
  int rows_from_edge(std::size_t k) const;

  // Fourth-order finite differences (one-sided at non-periodic edges).
  GridDerivatives derivatives(std::span<const double> s) const;

 private:
  SurfaceKind surface_ = SurfaceKind::Torus;
  int rows_ = 0, cols_ = 0;
  double start0_ = 0.0, h0_ = 0.0, h1_ = 0.0;
};

// Riemannian metric given per grid point in chart components.
using MetricField = std::vector<Mat2>;

struct MetricGeometry {
  std::vector<Mat2> inverse;
  std::vector<double> sqrt_det;
  // christoffel[k][p](i, j) = Γ^p_ij at point k.
  std::vector<std::array<Mat2, 2>> christoffel;
};

MetricGeometry metric_geometry(const ChartGrid& grid, const MetricField& metric);
std::vector<Mat2> grid_hessian(const ChartGrid& grid, const MetricGeometry& geo,
                               std::span<const double> s);
ScalarField grid_laplacian(const ChartGrid& grid, const MetricGeometry& geo,
                           std::span<const double> s);
ScalarField grid_grad_norm2(const ChartGrid& grid, const MetricGeometry& geo,
                            std::span<const double> s);
// Scalar curvature from the metric alone (Christoffels and their derivatives).
ScalarField grid_scalar_curvature(const ChartGrid& grid, const MetricGeometry& geo);
MetricField conformal_metric(const ChartGrid& grid, std::span<const double> phi);

class FiberDiscretization {
 public:
  explicit FiberDiscretization(TriMesh mesh) : impl_(std::move(mesh)) {}
  explicit FiberDiscretization(ChartGrid grid) : impl_(std::move(grid)) {}

  Backend backend() const;
  SurfaceKind surface() const;
  std::size_t size() const;
  bool is_mesh() const { return backend() == Backend::TriMesh; }
  const TriMesh& mesh() const;
  const ChartGrid& grid() const;

  // Unit-sphere point (x, y, z) for spheres; (a, b, 0) for tori.
  Vec3 position(std::size_t i) const;
  // g_F in the local basis used for differentials: identity on meshes,
  // chart components on grids.
  Mat2 baseline_metric(std::size_t i) const;
  // Variable names and values available to field expressions.
  std::vector<std::string> variables() const;
  std::vector<double> variable_values(std::size_t i) const;

  // Differential ds in the local basis at every point.
  std::vector<Vec2> differential(std::span<const double> s) const;

 private:
  std::variant<TriMesh, ChartGrid> impl_;
};

FiberDiscretization build_fiber(const FiberDescriptor& desc);

// ‖∇s‖² in g = φ²g_F.
ScalarField grad_norm2(const FiberDiscretization& fd, std::span<const double> phi,
                       std::span<const double> s);
// Δs = div grad s in g = φ²g_F.
ScalarField laplacian(const FiberDiscretization& fd, std::span<const double> phi,
                      std::span<const double> s);
// ∫ s dμ_g with g = φ²g_F on a closed surface.
double integrate(const FiberDiscretization& fd, std::span<const double> phi,
                 std::span<const double> s);
// Scalar curvature of g = φ²g_F. fiber_dim must be 2.
ScalarField scalar_curvature(const FiberDiscretization& fd, std::span<const double> phi,
                             int fiber_dim = 2);

struct Spectrum {
  double first = 0.0;             // smallest nonzero eigenvalue of -Δ
  int multiplicity = 0;
  std::vector<double> lowest;     // lowest computed eigenvalues including 0
};

// First nonzero eigenvalue of -Δ on (F, g_F). Closed meshes only.
Spectrum first_eigenvalue(const FiberDiscretization& fd, int block = 10,
                          double cluster_tol = 0.02);
// Same for g = φ²g_F.
Spectrum first_eigenvalue(const FiberDiscretization& fd, std::span<const double> phi,
                          int block = 10, double cluster_tol = 0.02);

}  // namespace leafgeom
