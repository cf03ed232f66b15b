#include "leafgeom/fiber.hpp"

#include "leafgeom/errors.hpp"
#include "leafgeom/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace leafgeom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinTriangleArea = 1e-14;

double corner_angle(const Vec3& at, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - at, v = b - at;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace

// ---------------------------------------------------------------------------
// TriMesh

TriMesh TriMesh::icosphere(int level, double radius) {
  if (level < 0 || level > 8) throw ConfigError("icosphere level must be in [0, 8]");
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                         {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                         {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriMesh m;
  m.surface_ = SurfaceKind::Sphere;
  m.radius_ = radius;
  m.positions_.reserve(v.size());
  for (const auto& x : v) m.positions_.push_back(radius * x);
  m.triangles_ = std::move(f);
  for (const auto& t : m.triangles_) {
    m.corners_.push_back({m.positions_[static_cast<std::size_t>(t[0])],
                          m.positions_[static_cast<std::size_t>(t[1])],
                          m.positions_[static_cast<std::size_t>(t[2])]});
  }
  m.finalize();
  return m;
}

TriMesh TriMesh::flat_torus(int n) {
  if (n < 3) throw ConfigError("torus mesh needs n >= 3");
  TriMesh m;
  m.surface_ = SurfaceKind::Torus;
  const double h = kTwoPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m.positions_.push_back({i * h, j * h, 0.0});
  }
  auto id = [n](int i, int j) { return (i % n) * n + (j % n); };
  auto pos = [h](int i, int j) { return Vec3(i * h, j * h, 0.0); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m.triangles_.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.corners_.push_back({pos(i, j), pos(i + 1, j), pos(i + 1, j + 1)});
      m.triangles_.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      m.corners_.push_back({pos(i, j), pos(i + 1, j + 1), pos(i, j + 1)});
    }
  }
  m.finalize();
  return m;
}

Vec3 TriMesh::normal(std::size_t i) const {
  if (surface_ == SurfaceKind::Torus) return Vec3::UnitZ();
  return positions_[i].normalized();
}

void TriMesh::finalize() {
  const std::size_t nv = positions_.size(), nt = triangles_.size();
  areas_.resize(nt);
  cot_.resize(nt);
  mass_.assign(nv, 0.0);
  incident_.assign(nv, {});
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nt * 12);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& c = corners_[t];
    const auto& tri = triangles_[t];
    const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
    if (area < kMinTriangleArea) {
      std::ostringstream os;
      os << "triangle " << t << " has area " << area;
      throw DegenerateTriangle(os.str());
    }
    areas_[t] = area;
    std::array<double, 3> ang{};
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = c[k];
      const Vec3& a = c[(k + 1) % 3];
      const Vec3& b = c[(k + 2) % 3];
      const Vec3 u = a - p, v = b - p;
      cot_[t][k] = u.dot(v) / u.cross(v).norm();
      ang[k] = corner_angle(p, a, b);
    }
    // Mixed Voronoi areas.
    const int obtuse = ang[0] > std::numbers::pi / 2   ? 0
                       : ang[1] > std::numbers::pi / 2 ? 1
                       : ang[2] > std::numbers::pi / 2 ? 2
                                                       : -1;
    for (int k = 0; k < 3; ++k) {
      const auto vi = static_cast<std::size_t>(tri[k]);
      incident_[vi].emplace_back(static_cast<int>(t), k);
      double w;
      if (obtuse < 0) {
        const int a = (k + 1) % 3, b = (k + 2) % 3;
        w = ((c[k] - c[b]).squaredNorm() * cot_[t][a] + (c[k] - c[a]).squaredNorm() * cot_[t][b]) /
            8.0;
      } else {
        w = obtuse == k ? area / 2.0 : area / 4.0;
      }
      mass_[vi] += w;
      const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      const double e = 0.5 * cot_[t][k];
      trip.emplace_back(a, b, -e);
      trip.emplace_back(b, a, -e);
      trip.emplace_back(a, a, e);
      trip.emplace_back(b, b, e);
    }
  }
  stiffness_.resize(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();
  basis_.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (surface_ == SurfaceKind::Torus) {
      basis_[i] = {Vec3::UnitX(), Vec3::UnitY()};
      continue;
    }
    const Vec3 n = normal(i);
    Vec3 a = n.cross(Vec3::UnitZ());
    if (a.norm() < 1e-3) a = n.cross(Vec3::UnitX());
    a.normalize();
    basis_[i] = {a, n.cross(a)};
  }
}

// ---------------------------------------------------------------------------
// ChartGrid

ChartGrid ChartGrid::sphere_band(int rows, int cols, double theta_min, double theta_max) {
  if (rows < 7 || cols < 8) throw ConfigError("chart grid needs at least 7 rows and 8 columns");
  if (!(theta_min > 0.0) || !(theta_max < std::numbers::pi) || !(theta_min < theta_max)) {
    throw ConfigError("sphere band needs 0 < theta_min < theta_max < pi");
  }
  ChartGrid g;
  g.surface_ = SurfaceKind::Sphere;
  g.rows_ = rows;
  g.cols_ = cols;
  g.start0_ = theta_min;
  g.h0_ = (theta_max - theta_min) / (rows - 1);
  g.h1_ = kTwoPi / cols;
  return g;
}

ChartGrid ChartGrid::torus(int rows, int cols) {
  if (rows < 8 || cols < 8) throw ConfigError("torus grid needs at least 8 x 8 nodes");
  ChartGrid g;
  g.surface_ = SurfaceKind::Torus;
  g.rows_ = rows;
  g.cols_ = cols;
  g.h0_ = kTwoPi / rows;
  g.h1_ = kTwoPi / cols;
  return g;
}

Vec2 ChartGrid::coord(std::size_t k) const {
  const auto i = static_cast<int>(k / static_cast<std::size_t>(cols_));
  const auto j = static_cast<int>(k % static_cast<std::size_t>(cols_));
  return {start0_ + i * h0_, j * h1_};
}

Mat2 ChartGrid::baseline_metric(std::size_t k) const {
  Mat2 g = Mat2::Identity();
  if (surface_ == SurfaceKind::Sphere) {
    const double s = std::sin(coord(k)(0));
    g(1, 1) = s * s;
  }
  return g;
}

int ChartGrid::rows_from_edge(std::size_t k) const {
  if (periodic_rows()) return rows_;
  const auto i = static_cast<int>(k / static_cast<std::size_t>(cols_));
  return std::min(i, rows_ - 1 - i);
}

GridDerivatives ChartGrid::derivatives(std::span<const double> s) const {
  return kernels::grid_derivatives(*this, s);
}

MetricField conformal_metric(const ChartGrid& grid, std::span<const double> phi) {
  MetricField g(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) g[k] = phi[k] * phi[k] * grid.baseline_metric(k);
  return g;
}

MetricGeometry metric_geometry(const ChartGrid& grid, const MetricField& metric) {
  const std::size_t n = grid.size();
  ScalarField c00(n), c01(n), c11(n);
  for (std::size_t k = 0; k < n; ++k) {
    c00[k] = metric[k](0, 0);
    c01[k] = metric[k](0, 1);
    c11[k] = metric[k](1, 1);
  }
  const auto d00 = grid.derivatives(c00), d01 = grid.derivatives(c01), d11 = grid.derivatives(c11);
  MetricGeometry geo;
  geo.inverse.resize(n);
  geo.sqrt_det.resize(n);
  geo.christoffel.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    geo.inverse[k] = metric[k].inverse();
    geo.sqrt_det[k] = std::sqrt(metric[k].determinant());
    // dg[l](i, j) = ∂_l g_ij
    std::array<Mat2, 2> dg;
    dg[0] << d00.d0[k], d01.d0[k], d01.d0[k], d11.d0[k];
    dg[1] << d00.d1[k], d01.d1[k], d01.d1[k], d11.d1[k];
    for (int p = 0; p < 2; ++p) {
      Mat2 gam;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          double acc = 0.0;
          for (int l = 0; l < 2; ++l) {
            acc += geo.inverse[k](p, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          }
          gam(i, j) = 0.5 * acc;
        }
      }
      geo.christoffel[k][static_cast<std::size_t>(p)] = gam;
    }
  }
  return geo;
}

std::vector<Mat2> grid_hessian(const ChartGrid& grid, const MetricGeometry& geo,
                               std::span<const double> s) {
  const auto d = grid.derivatives(s);
  std::vector<Mat2> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Mat2 h;
    h << d.d00[k], d.d01[k], d.d01[k], d.d11[k];
    const auto& gam = geo.christoffel[k];
    h -= gam[0] * d.d0[k] + gam[1] * d.d1[k];
    out[k] = h;
  }
  return out;
}

ScalarField grid_laplacian(const ChartGrid& grid, const MetricGeometry& geo,
                           std::span<const double> s) {
  const auto hess = grid_hessian(grid, geo, s);
  ScalarField out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = (geo.inverse[k] * hess[k]).trace();
  return out;
}

ScalarField grid_grad_norm2(const ChartGrid& grid, const MetricGeometry& geo,
                            std::span<const double> s) {
  const auto d = grid.derivatives(s);
  ScalarField out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 ds(d.d0[k], d.d1[k]);
    out[k] = ds.dot(geo.inverse[k] * ds);
  }
  return out;
}

ScalarField grid_scalar_curvature(const ChartGrid& grid, const MetricGeometry& geo) {
  const std::size_t n = grid.size();
  // dgam[p][i][j] holds derivatives of Γ^p_ij.
  std::array<std::array<std::array<GridDerivatives, 2>, 2>, 2> dgam;
  ScalarField comp(n);
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) {
        for (std::size_t k = 0; k < n; ++k) comp[k] = geo.christoffel[k][static_cast<std::size_t>(p)](i, j);
        dgam[p][i][j] = grid.derivatives(comp);
        if (i != j) dgam[p][j][i] = dgam[p][i][j];
      }
    }
  }
  ScalarField out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& G = geo.christoffel[k];
    auto gam = [&](int p, int i, int j) { return G[static_cast<std::size_t>(p)](i, j); };
    auto dg = [&](int l, int p, int i, int j) {
      return l == 0 ? dgam[p][i][j].d0[k] : dgam[p][i][j].d1[k];
    };
    // R^l_{101} = ∂_0 Γ^l_11 - ∂_1 Γ^l_10 + Γ^l_0m Γ^m_11 - Γ^l_1m Γ^m_10
    Vec2 riem;
    for (int l = 0; l < 2; ++l) {
      double r = dg(0, l, 1, 1) - dg(1, l, 1, 0);
      for (int m = 0; m < 2; ++m) r += gam(l, 0, m) * gam(m, 1, 1) - gam(l, 1, m) * gam(m, 1, 0);
      riem(l) = r;
    }
    const Mat2 g = geo.inverse[k].inverse();
    const double gauss = (g(0, 0) * riem(0) + g(0, 1) * riem(1)) / g.determinant();
    out[k] = 2.0 * gauss;
  }
  return out;
}

// ---------------------------------------------------------------------------
// FiberDiscretization

Backend FiberDiscretization::backend() const {
  return std::holds_alternative<TriMesh>(impl_) ? Backend::TriMesh : Backend::ChartGrid;
}

SurfaceKind FiberDiscretization::surface() const {
  return std::visit([](const auto& x) { return x.surface(); }, impl_);
}

std::size_t FiberDiscretization::size() const {
  return std::visit([](const auto& x) { return x.size(); }, impl_);
}

const TriMesh& FiberDiscretization::mesh() const {
  if (!is_mesh()) throw UnsupportedBackend("operation needs a triangle mesh");
  return std::get<TriMesh>(impl_);
}

const ChartGrid& FiberDiscretization::grid() const {
  if (is_mesh()) throw UnsupportedBackend("operation needs a chart grid");
  return std::get<ChartGrid>(impl_);
}

Vec3 FiberDiscretization::position(std::size_t i) const {
  if (is_mesh()) {
    const auto& m = mesh();
    return m.surface() == SurfaceKind::Sphere ? m.positions()[i].normalized() : m.positions()[i];
  }
  const auto& g = grid();
  const Vec2 c = g.coord(i);
  if (g.surface() == SurfaceKind::Torus) return {c(0), c(1), 0.0};
  return {std::sin(c(0)) * std::cos(c(1)), std::sin(c(0)) * std::sin(c(1)), std::cos(c(0))};
}

Mat2 FiberDiscretization::baseline_metric(std::size_t i) const {
  if (is_mesh()) return Mat2::Identity();
  return grid().baseline_metric(i);
}

std::vector<std::string> FiberDiscretization::variables() const {
  if (surface() == SurfaceKind::Torus) return {"a", "b"};
  return {"x", "y", "z", "theta", "phi"};
}

std::vector<double> FiberDiscretization::variable_values(std::size_t i) const {
  const Vec3 p = position(i);
  if (surface() == SurfaceKind::Torus) return {p(0), p(1)};
  double theta, phi;
  if (is_mesh()) {
    theta = std::acos(std::clamp(p(2), -1.0, 1.0));
    phi = std::atan2(p(1), p(0));
    if (phi < 0) phi += kTwoPi;
  } else {
    const Vec2 c = grid().coord(i);
    theta = c(0);
    phi = c(1);
  }
  return {p(0), p(1), p(2), theta, phi};
}

std::vector<Vec2> FiberDiscretization::differential(std::span<const double> s) const {
  if (is_mesh()) return kernels::vertex_gradients(mesh(), s);
  const auto d = grid().derivatives(s);
  std::vector<Vec2> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = {d.d0[k], d.d1[k]};
  return out;
}

FiberDiscretization build_fiber(const FiberDescriptor& desc) {
  if (desc.backend == Backend::TriMesh) {
    if (desc.surface == SurfaceKind::Sphere) {
      return FiberDiscretization(TriMesh::icosphere(desc.level, desc.radius));
    }
    return FiberDiscretization(TriMesh::flat_torus(desc.n));
  }
  if (desc.surface == SurfaceKind::Sphere) {
    return FiberDiscretization(
        ChartGrid::sphere_band(desc.rows, desc.cols, desc.theta_min, desc.theta_max));
  }
  return FiberDiscretization(ChartGrid::torus(desc.rows, desc.cols));
}

namespace {

void require_positive(std::span<const double> phi, std::size_t n) {
  if (phi.size() != n) throw ConfigError("conformal factor has wrong length");
  for (double x : phi) {
    if (!(x > 0.0)) throw DomainError("conformal factor must be positive");
  }
}

}  // namespace

ScalarField grad_norm2(const FiberDiscretization& fd, std::span<const double> phi,
                       std::span<const double> s) {
  require_positive(phi, fd.size());
  if (!fd.is_mesh()) {
    const auto& g = fd.grid();
    return grid_grad_norm2(g, metric_geometry(g, conformal_metric(g, phi)), s);
  }
  const auto grads = kernels::vertex_gradients(fd.mesh(), s);
  ScalarField out(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) out[i] = grads[i].squaredNorm() / (phi[i] * phi[i]);
  return out;
}

ScalarField laplacian(const FiberDiscretization& fd, std::span<const double> phi,
                      std::span<const double> s) {
  require_positive(phi, fd.size());
  if (!fd.is_mesh()) {
    const auto& g = fd.grid();
    return grid_laplacian(g, metric_geometry(g, conformal_metric(g, phi)), s);
  }
  const auto& m = fd.mesh();
  auto ks = kernels::stiffness_apply(m, s);
  // Two-dimensional fibers: Δ_g = φ⁻² Δ_F.
  for (std::size_t i = 0; i < fd.size(); ++i) ks[i] = -ks[i] / (m.mass()[i] * phi[i] * phi[i]);
  return ks;
}

double integrate(const FiberDiscretization& fd, std::span<const double> phi,
                 std::span<const double> s) {
  require_positive(phi, fd.size());
  double acc = 0.0;
  if (fd.is_mesh()) {
    const auto& w = fd.mesh().mass();
    for (std::size_t i = 0; i < fd.size(); ++i) acc += s[i] * w[i] * phi[i] * phi[i];
    return acc;
  }
  const auto& g = fd.grid();
  if (g.surface() != SurfaceKind::Torus) {
    throw UnsupportedSurface("integration needs a closed surface; the sphere band has edges");
  }
  for (std::size_t k = 0; k < fd.size(); ++k) acc += s[k] * phi[k] * phi[k];
  return acc * g.h0() * g.h1();
}

ScalarField scalar_curvature(const FiberDiscretization& fd, std::span<const double> phi,
                             int fiber_dim) {
  if (fiber_dim != 2) throw UnsupportedDimension("fiber curvature is implemented for surfaces only");
  require_positive(phi, fd.size());
  if (!fd.is_mesh()) {
    const auto& g = fd.grid();
    return grid_scalar_curvature(g, metric_geometry(g, conformal_metric(g, phi)));
  }
  const auto& m = fd.mesh();
  ScalarField defect(fd.size(), kTwoPi);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles()[t];
    const auto& c = m.corners(t);
    std::array<double, 3> len{};
    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;
      const double sa = phi[static_cast<std::size_t>(tri[a])];
      const double sb = phi[static_cast<std::size_t>(tri[b])];
      len[k] = (c[a] - c[b]).norm() * std::sqrt(sa * sb);
    }
    for (int k = 0; k < 3; ++k) {
      const double a = len[(k + 1) % 3], b = len[(k + 2) % 3], opp = len[k];
      const double cosk = std::clamp((a * a + b * b - opp * opp) / (2 * a * b), -1.0, 1.0);
      defect[static_cast<std::size_t>(tri[k])] -= std::acos(cosk);
    }
  }
  ScalarField out(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    out[i] = 2.0 * defect[i] / (m.mass()[i] * phi[i] * phi[i]);
  }
  return out;
}

Spectrum first_eigenvalue(const FiberDiscretization& fd, int block, double cluster_tol) {
  const ScalarField ones(fd.size(), 1.0);
  return first_eigenvalue(fd, ones, block, cluster_tol);
}

Spectrum first_eigenvalue(const FiberDiscretization& fd, std::span<const double> phi, int block,
                          double cluster_tol) {
  if (!fd.is_mesh()) throw UnsupportedBackend("eigenvalues need a closed triangle mesh");
  require_positive(phi, fd.size());
  const auto& m = fd.mesh();
  const auto n = static_cast<Eigen::Index>(m.size());
  // The Dirichlet energy is conformally invariant on surfaces; only the mass changes.
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = m.mass()[i] * phi[i] * phi[i];
  const double area = w.sum();
  const double shift = 0.1 * 4.0 * std::numbers::pi / area;
  Eigen::SparseMatrix<double> K = m.stiffness();
  Eigen::SparseMatrix<double> A = K;
  for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) += shift * w(i);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw SolverFailure("factorization of shifted stiffness failed");

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = nd(rng);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(block), prev;
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    Eigen::MatrixXd Y = solver.solve(w.asDiagonal() * X);
    const Eigen::MatrixXd KY = K * Y;
    const Eigen::MatrixXd Kp = Y.transpose() * KY;
    const Eigen::MatrixXd Mp = Y.transpose() * w.asDiagonal() * Y;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ge(0.5 * (Kp + Kp.transpose()),
                                                                 0.5 * (Mp + Mp.transpose()));
    X = Y * ge.eigenvectors();
    prev = vals;
    vals = ge.eigenvalues();
    if (it > 3) {
      const double scale = std::max(vals(block - 1), 1e-300);
      if ((vals.head(block - 2) - prev.head(block - 2)).cwiseAbs().maxCoeff() < 1e-13 * scale) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) throw SolverFailure("subspace iteration did not converge");
  Spectrum s;
  s.lowest.assign(vals.data(), vals.data() + block);
  const double zero_tol = 1e-8 * vals(block - 1);
  int first = 0;
  while (first < block && vals(first) <= zero_tol) ++first;
  if (first >= block) throw SolverFailure("no nonzero eigenvalue in the computed block");
  s.first = vals(first);
  for (int k = first; k < block && vals(k) <= s.first * (1.0 + cluster_tol); ++k) ++s.multiplicity;
  if (first + s.multiplicity >= block) throw SolverFailure("eigenvalue cluster fills the block");
  return s;
}

}  // namespace leafgeom
