#include "leafgeom/errors.hpp"
#include "leafgeom/fiber.hpp"
#include "leafgeom/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace leafgeom;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField constant(std::size_t n, double c) { return ScalarField(n, c); }

ScalarField z_field(const FiberDiscretization& fd) {
  ScalarField z(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) z[i] = fd.position(i)(2);
  return z;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

FiberDiscretization band(int rows) {
  return FiberDiscretization(ChartGrid::sphere_band(rows, 2 * (rows - 1), 0.35, kPi - 0.35));
}

}  // namespace

TEST(TriMesh, IcosphereCombinatorics) {
  for (int level = 0; level <= 4; ++level) {
    auto m = TriMesh::icosphere(level);
    const std::size_t expected = 10 * (std::size_t{1} << (2 * level)) + 2;
    EXPECT_EQ(m.size(), expected);
    EXPECT_EQ(m.triangle_count(), 20 * (std::size_t{1} << (2 * level)));
    for (const auto& p : m.positions()) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    // Euler characteristic 2 and outward orientation.
    EXPECT_EQ(static_cast<long>(m.size()) - static_cast<long>(3 * m.triangle_count() / 2) +
                  static_cast<long>(m.triangle_count()),
              2);
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
      const auto& c = m.corners(t);
      EXPECT_GT((c[1] - c[0]).cross(c[2] - c[0]).dot(c[0] + c[1] + c[2]), 0.0);
    }
  }
  EXPECT_THROW(TriMesh::icosphere(-1), ConfigError);
}

TEST(TriMesh, QuadratureWeights) {
  double prev_err = 1.0;
  for (int level = 2; level <= 5; ++level) {
    auto m = TriMesh::icosphere(level);
    double sum = 0;
    for (double w : m.mass()) {
      EXPECT_GT(w, 0.0);
      sum += w;
    }
    const double err = std::abs(sum / (4 * kPi) - 1);
    EXPECT_LT(err, prev_err / 3.5);  // O(h²)
    prev_err = err;
  }
  auto t = TriMesh::flat_torus(16);
  double sum = 0;
  for (double w : t.mass()) sum += w;
  EXPECT_NEAR(sum, 4 * kPi * kPi, 1e-10);
}

TEST(Fiber, BuildErrors) {
  FiberDescriptor d;
  d.backend = Backend::ChartGrid;
  d.theta_min = 0.0;
  EXPECT_THROW(build_fiber(d), ConfigError);
  d.theta_min = 0.3;
  d.rows = 3;
  EXPECT_THROW(build_fiber(d), ConfigError);
  EXPECT_THROW(TriMesh::flat_torus(2), ConfigError);
}

TEST(Fiber, MeshOperatorsOnSphere) {
  double prev_lap = 1, prev_grad = 1;
  for (int level = 3; level <= 5; ++level) {
    FiberDiscretization fd(TriMesh::icosphere(level));
    const auto one = constant(fd.size(), 1.0);
    const auto z = z_field(fd);
    ScalarField expect_grad(fd.size()), expect_lap(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      expect_grad[i] = 1 - z[i] * z[i];
      expect_lap[i] = -2 * z[i];
    }
    const double eg = max_abs_diff(grad_norm2(fd, one, z), expect_grad);
    const double el = max_abs_diff(laplacian(fd, one, z), expect_lap);
    EXPECT_LT(eg, 0.7 * prev_grad);
    EXPECT_LT(el, 0.7 * prev_lap);
    prev_grad = eg;
    prev_lap = el;
    EXPECT_NEAR(integrate(fd, one, z), 0.0, 1e-12);
  }
  EXPECT_LT(prev_grad, 5e-3);
  EXPECT_LT(prev_lap, 5e-3);
}

TEST(Fiber, ConstantsAndDivergenceTheorem) {
  FiberDiscretization fd(TriMesh::icosphere(3));
  const auto one = constant(fd.size(), 1.0);
  for (double x : laplacian(fd, one, constant(fd.size(), 3.0))) EXPECT_NEAR(x, 0.0, 1e-12);
  for (double x : grad_norm2(fd, one, constant(fd.size(), 3.0))) EXPECT_NEAR(x, 0.0, 1e-24);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField s(fd.size()), phi(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    s[i] = u(rng);
    phi[i] = 2 + 0.5 * u(rng);
  }
  const double total = integrate(fd, phi, laplacian(fd, phi, s));
  EXPECT_NEAR(total, 0.0, 1e-11);
}

TEST(Fiber, ConformalCovarianceIsExact) {
  for (int which = 0; which < 2; ++which) {
    FiberDiscretization fd = which == 0 ? FiberDiscretization(TriMesh::icosphere(3))
                                        : FiberDiscretization(ChartGrid::torus(16, 16));
    const auto one = constant(fd.size(), 1.0), k = constant(fd.size(), 2.5);
    ScalarField s(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const Vec3 p = fd.position(i);
      s[i] = std::sin(p(0)) + p(1) * p(2) + std::cos(p(1));
    }
    const auto g1 = grad_norm2(fd, one, s), gk = grad_norm2(fd, k, s);
    const auto l1 = laplacian(fd, one, s), lk = laplacian(fd, k, s);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      EXPECT_NEAR(gk[i], g1[i] / 6.25, 1e-12 * (1 + std::abs(g1[i])));
      EXPECT_NEAR(lk[i], l1[i] / 6.25, 1e-10 * (1 + std::abs(l1[i])));
    }
    EXPECT_NEAR(integrate(fd, k, s), 6.25 * integrate(fd, one, s), 1e-10);
  }
}

TEST(Fiber, Integrals) {
  FiberDiscretization fd(TriMesh::icosphere(5));
  const auto one = constant(fd.size(), 1.0);
  EXPECT_NEAR(integrate(fd, one, one), 4 * kPi, 4 * kPi * 5e-4);
  EXPECT_NEAR(integrate(fd, constant(fd.size(), 3.0), one), 36 * kPi, 36 * kPi * 5e-4);
  FiberDiscretization torus(TriMesh::flat_torus(16));
  EXPECT_NEAR(integrate(torus, constant(torus.size(), 1.0), constant(torus.size(), 1.0)),
              4 * kPi * kPi, 1e-10);
  FiberDiscretization tg(ChartGrid::torus(16, 16));
  EXPECT_NEAR(integrate(tg, constant(tg.size(), 1.0), constant(tg.size(), 1.0)), 4 * kPi * kPi,
              1e-10);
  auto b = band(17);
  EXPECT_THROW(integrate(b, constant(b.size(), 1.0), constant(b.size(), 1.0)),
               UnsupportedSurface);
}

TEST(Fiber, ScalarCurvatureOnMeshes) {
  FiberDiscretization fd(TriMesh::icosphere(5));
  const auto one = constant(fd.size(), 1.0);
  for (double s : scalar_curvature(fd, one)) EXPECT_NEAR(s, 2.0, 1e-3);
  for (double s : scalar_curvature(fd, constant(fd.size(), 4.0))) EXPECT_NEAR(s, 2.0 / 16, 1e-4);
  FiberDiscretization torus(TriMesh::flat_torus(12));
  for (double s : scalar_curvature(torus, constant(torus.size(), 1.0))) EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_THROW(scalar_curvature(fd, one, 3), UnsupportedDimension);
  // Total curvature is exactly 4π χ for any conformal factor.
  const auto z = z_field(fd);
  ScalarField phi(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) phi[i] = 4 + 0.3 * z[i];
  EXPECT_NEAR(integrate(fd, phi, scalar_curvature(fd, phi)), 8 * kPi, 1e-9);
}

TEST(ChartGrid, DerivativeOrder) {
  // s = sin(θ)^2 cos(2φ) + θ^3 on the band; fourth-order accuracy including edges.
  double prev = 0;
  for (int rows : {17, 33, 65}) {
    auto fd = band(rows);
    const auto& g = fd.grid();
    ScalarField s(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 c = g.coord(k);
      s[k] = std::pow(std::sin(c(0)), 2) * std::cos(2 * c(1)) + std::pow(c(0), 3);
    }
    const auto d = g.derivatives(s);
    double err = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g.coord(k)(0), p = g.coord(k)(1);
      const double st = std::sin(t), ct = std::cos(t);
      err = std::max(err, std::abs(d.d0[k] - (2 * st * ct * std::cos(2 * p) + 3 * t * t)));
      err = std::max(err, std::abs(d.d1[k] + 2 * st * st * std::sin(2 * p)));
      err = std::max(err, std::abs(d.d00[k] - (2 * std::cos(2 * t) * std::cos(2 * p) + 6 * t)));
      err = std::max(err, std::abs(d.d01[k] + 4 * st * ct * std::sin(2 * p)));
      err = std::max(err, std::abs(d.d11[k] + 4 * st * st * std::cos(2 * p)));
    }
    if (prev > 0) EXPECT_GT(std::log2(prev / err), 3.0) << rows;
    prev = err;
  }
}

TEST(ChartGrid, SphereHarmonicOracle) {
  double prev_g = 0, prev_l = 0;
  for (int rows : {33, 65, 129}) {
    auto fd = band(rows);
    const auto one = constant(fd.size(), 1.0);
    const auto z = z_field(fd);
    ScalarField eg(fd.size()), el(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      eg[i] = 1 - z[i] * z[i];
      el[i] = -2 * z[i];
    }
    const double dg = max_abs_diff(grad_norm2(fd, one, z), eg);
    const double dl = max_abs_diff(laplacian(fd, one, z), el);
    if (prev_g > 0) {
      EXPECT_GE(std::log2(prev_g / dg), 3.0);
      EXPECT_GE(std::log2(prev_l / dl), 3.0);
    }
    prev_g = dg;
    prev_l = dl;
  }
}

TEST(ChartGrid, CurvatureFromMetricMatchesConformalOracle) {
  // For g = φ² g_F on the unit sphere: S = φ⁻² (2 - 2 Δ_F ln φ).
  double prev = 0;
  for (int rows : {33, 65, 129}) {
    auto fd = band(rows);
    const auto& g = fd.grid();
    ScalarField phi(fd.size()), expect(fd.size());
    for (std::size_t k = 0; k < fd.size(); ++k) {
      const double t = g.coord(k)(0);
      const double f = 4 + 0.3 * std::cos(t), fp = -0.3 * std::sin(t), fpp = -0.3 * std::cos(t);
      const double dl = fpp / f - fp * fp / (f * f) + std::cos(t) / std::sin(t) * fp / f;
      phi[k] = f;
      expect[k] = (2 - 2 * dl) / (f * f);
    }
    const double err = max_abs_diff(scalar_curvature(fd, phi), expect);
    if (prev > 0) EXPECT_GE(std::log2(prev / err), 2.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
  FiberDiscretization tg(ChartGrid::torus(16, 16));
  for (double s : scalar_curvature(tg, constant(tg.size(), 1.0))) EXPECT_NEAR(s, 0.0, 1e-12);
}

TEST(Spectrum, SphereAndTorus) {
  FiberDiscretization s4(TriMesh::icosphere(4));
  auto sp = first_eigenvalue(s4);
  EXPECT_NEAR(sp.first, 2.0, 0.01);
  EXPECT_EQ(sp.multiplicity, 3);
  EXPECT_NEAR(sp.lowest[0], 0.0, 1e-9);
  FiberDiscretization big(TriMesh::icosphere(3, 2.0));
  auto sb = first_eigenvalue(big);
  EXPECT_NEAR(sb.first, 0.5, 0.005);  // curvature 1/4
  EXPECT_EQ(sb.multiplicity, 3);
  FiberDiscretization torus(TriMesh::flat_torus(32));
  auto st = first_eigenvalue(torus);
  // Five-point stencil value of the Fourier mode.
  const double h = 2 * kPi / 32;
  EXPECT_NEAR(st.first, 4 / (h * h) * std::pow(std::sin(h / 2), 2), 1e-9);
  EXPECT_EQ(st.multiplicity, 4);
  EXPECT_THROW(first_eigenvalue(band(17)), UnsupportedBackend);
}

TEST(Kernels, ParallelMatchesReference) {
  FiberDiscretization fd(TriMesh::icosphere(4));
  const auto& m = fd.mesh();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField s(m.size());
  for (auto& x : s) x = u(rng);
  const auto a = kernels::stiffness_apply(m, s), b = kernels::reference::stiffness_apply(m, s);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  const auto ga = kernels::vertex_gradients(m, s), gb = kernels::reference::vertex_gradients(m, s);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT((ga[i] - gb[i]).norm(), 1e-12);
  auto gfd = band(33);
  const auto& g = gfd.grid();
  ScalarField t(g.size());
  for (auto& x : t) x = u(rng);
  const auto da = kernels::grid_derivatives(g, t), db = kernels::reference::grid_derivatives(g, t);
  EXPECT_EQ(da.d0, db.d0);
  EXPECT_EQ(da.d01, db.d01);
  EXPECT_EQ(da.d11, db.d11);
}

TEST(Fiber, ExpressionVariables) {
  auto fd = band(9);
  EXPECT_EQ(fd.variables().size(), 5u);
  const auto v = fd.variable_values(fd.grid().index(2, 3));
  EXPECT_NEAR(v[3], fd.grid().coord(fd.grid().index(2, 3))(0), 1e-15);
  EXPECT_NEAR(v[2], std::cos(v[3]), 1e-15);
  FiberDiscretization torus(TriMesh::flat_torus(8));
  EXPECT_EQ(torus.variables(), (std::vector<std::string>{"a", "b"}));
}

TEST(Spectrum, ConformalScaling) {
  const auto fd = build_fiber({Backend::TriMesh, SurfaceKind::Sphere, 3});
  const auto base = first_eigenvalue(fd);
  const auto scaled = first_eigenvalue(fd, constant(fd.size(), 2.0));
  EXPECT_NEAR(scaled.first, base.first / 4.0, 1e-10);
  EXPECT_EQ(scaled.multiplicity, 3);
}
