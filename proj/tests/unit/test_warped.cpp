#include "leafgeom/errors.hpp"
#include "leafgeom/warped.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace leafgeom;

namespace {

ProfileSpec schwarzschild() {
  ProfileSpec s;
  s.mass = 1.0;
  return s;
}

ProfileSpec flat_one() {
  ProfileSpec s;
  s.warping = Warping::constant_one();
  return s;
}

double max_gap(const Christoffel& a, const Christoffel& b) {
  double g = 0;
  for (std::size_t k = 0; k < 4; ++k) g = std::max(g, (a.gamma[k] - b.gamma[k]).cwiseAbs().maxCoeff());
  return g;
}

struct Sampler {
  std::mt19937_64 rng{17};
  std::uniform_real_distribution<double> u{0.0, 1.0};
  AmbientPoint sphere_point(double r_lo, double r_hi) {
    AmbientPoint p;
    p.chart = FiberChart::SpherePolarZ;
    p.coords = Vec4(-5 + 10 * u(rng), r_lo + (r_hi - r_lo) * u(rng), 0.4 + 2.3 * u(rng),
                    2 * std::numbers::pi * u(rng));
    return p;
  }
  Vec4 vec() { return Vec4(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5); }
};

}  // namespace

TEST(Ambient, MetricExamples) {
  Profile mink(flat_one());
  AmbientPoint p;
  p.coords = Vec4(0.3, 2.0, 0.1, -0.4);
  EXPECT_TRUE(ambient_metric(mink, p).isApprox(Vec4(-1, 1, 1, 1).asDiagonal().toDenseMatrix()));
  Profile s(schwarzschild());
  AmbientPoint q;
  q.chart = FiberChart::SpherePolarZ;
  q.coords = Vec4(0.0, 4.0, std::numbers::pi / 2, 0.3);
  const Mat4 g = ambient_metric(s, q);
  EXPECT_NEAR((g - Vec4(-0.5, 2, 16, 16).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 0.0,
              1e-14);
  Sampler smp;
  for (int i = 0; i < 200; ++i) EXPECT_LT(ambient_metric(s, smp.sphere_point(2.1, 30)).determinant(), 0.0);
}

TEST(Ambient, OracleMatchesClosedForm) {
  Profile mink(flat_one());
  AmbientPoint p;
  p.coords = Vec4(0.3, 2.0, 0.1, -0.4);
  for (const auto& m : oracle_christoffel(mink, p).gamma) EXPECT_LE(m.cwiseAbs().maxCoeff(), 1e-10);

  Profile s(schwarzschild());
  AmbientPoint q;
  q.chart = FiberChart::SpherePolarZ;
  q.coords = Vec4(0.0, 4.0, 1.2, 0.3);
  EXPECT_NEAR(oracle_christoffel(s, q).gamma[1](0, 0), 0.03125, 1e-8);

  ProfileSpec custom = schwarzschild();
  custom.warping = Warping::custom("r*exp(0.1*t) + 0.01*t^2*r");
  Profile c(custom);
  Sampler smp;
  for (const Profile* prof : {&s, &c}) {
    for (int i = 0; i < 100; ++i) {
      const auto pt = smp.sphere_point(2.5, 20);
      EXPECT_LT(max_gap(oracle_christoffel(*prof, pt), closed_christoffel(*prof, pt)), 1e-8);
      EXPECT_LT(oracle_richardson_gap(*prof, pt), 1e-8);
    }
  }
}

TEST(Ambient, OracleIsMetricCompatible) {
  Profile s(schwarzschild());
  Sampler smp;
  for (int n = 0; n < 20; ++n) {
    const auto p = smp.sphere_point(2.5, 10);
    const auto gam = oracle_christoffel(s, p);
    const Mat4 g = ambient_metric(s, p);
    const double h = 1e-3;
    for (int k = 0; k < 4; ++k) {
      AmbientPoint a = p, b = p;
      a.coords(k) += h;
      b.coords(k) -= h;
      const Mat4 dg = (ambient_metric(s, a) - ambient_metric(s, b)) / (2 * h);
      // ∇_k g_ij = ∂_k g_ij - Γ^l_ki g_lj - Γ^l_kj g_il
      Mat4 lower;  // lower(i, j) = Γ^l_ki g_lj
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          double acc = 0;
          for (int l = 0; l < 4; ++l) acc += gam.gamma[static_cast<std::size_t>(l)](k, i) * g(l, j);
          lower(i, j) = acc;
        }
      }
      const Mat4 nabla = dg - lower - lower.transpose();
      EXPECT_LT(nabla.cwiseAbs().maxCoeff(), 1e-5 * (1 + g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Ambient, ClosedCovariantDerivativeExamples) {
  Profile s(schwarzschild());
  AmbientPoint p;
  p.chart = FiberChart::SpherePolarZ;
  p.coords = Vec4(0.5, 4.0, 1.0, 2.0);
  // ξ is geodesic.
  const Vec4 xi = xi_field(s)(p.coords);
  const Vec4 dxi = directional_derivative(xi_field(s), p.coords, xi);
  EXPECT_LT(closed_covderiv(s, p, xi, xi, dxi).norm(), 1e-10);
  // ∇_{∂r} V = V / r for a constant-coefficient fiber field.
  const Vec4 v(0, 0, 0.3, -0.2);
  EXPECT_LT((closed_covderiv(s, p, Vec4(0, 1, 0, 0), v, Vec4::Zero()) - v / 4.0).norm(), 1e-14);
  // Unit fiber vector: base part of ∇_V V is -(f²/r) ∂r.
  const Vec4 unit(0, 0, 1.0 / 4.0, 0);
  const Vec4 vv = closed_covderiv(s, p, unit, unit, Vec4::Zero());
  EXPECT_NEAR(vv(0), 0.0, 1e-15);
  EXPECT_NEAR(vv(1), -0.5 / 4.0, 1e-15);
  EXPECT_LT((vv - oracle_covderiv(s, p, unit, unit, Vec4::Zero())).norm(), 1e-8);
}

TEST(Ambient, RandomGermsAgreeWithOracle) {
  Profile s(schwarzschild());
  Sampler smp;
  for (int n = 0; n < 300; ++n) {
    const auto p = smp.sphere_point(2.3, 25);
    const Vec4 x = smp.vec(), y = smp.vec(), dy = smp.vec();
    EXPECT_LT((closed_covderiv(s, p, x, y, dy) - oracle_covderiv(s, p, x, y, dy)).norm(), 1e-6);
  }
}

TEST(Ambient, RecurrenceOfLightlikeFrame) {
  ProfileSpec custom = schwarzschild();
  custom.warping = Warping::custom("r*exp(0.1*t)");
  Profile s(schwarzschild()), c(custom);
  Sampler smp;
  for (const Profile* prof : {&s, &c}) {
    const auto xi = xi_field(*prof), eta = eta_field(*prof);
    for (int n = 0; n < 100; ++n) {
      const auto p = smp.sphere_point(2.3, 25);
      const BasePoint b = p.base();
      const auto alpha = alpha_form(*prof, b);
      const auto nw = null_weingarten_factor(*prof, b);
      const Vec4 xv = xi(p.coords), ev = eta(p.coords);
      // Base directions: ∇ξ = α⊗ξ, ∇η = -α⊗η.
      for (const Vec4& x : {Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), xv, ev}) {
        const double a = alpha.w_t * x(0) + alpha.w_r * x(1);
        const Vec4 dxi = oracle_covderiv(*prof, p, x, xv, directional_derivative(xi, p.coords, x));
        const Vec4 deta = oracle_covderiv(*prof, p, x, ev, directional_derivative(eta, p.coords, x));
        EXPECT_LT((dxi - a * xv).norm(), 1e-6);
        EXPECT_LT((deta + a * ev).norm(), 1e-6);
      }
      // Fiber directions: ∇_V ξ = (ξλ/λ) V and ∇_V η = (ηλ/λ) V.
      const Vec4 v(0, 0, 0.7, -0.3);
      const Vec4 dxi = oracle_covderiv(*prof, p, v, xv, directional_derivative(xi, p.coords, v));
      const Vec4 deta = oracle_covderiv(*prof, p, v, ev, directional_derivative(eta, p.coords, v));
      EXPECT_LT((dxi - nw.xi * v).norm(), 1e-6);
      EXPECT_LT((deta - nw.eta * v).norm(), 1e-6);
    }
  }
}

TEST(Ambient, EtaIsPregeodesic) {
  Profile s(schwarzschild());
  AmbientPoint p;
  p.chart = FiberChart::SpherePolarZ;
  p.coords = Vec4(0.0, 3.0, 1.0, 1.0);
  const auto eta = eta_field(s);
  const Vec4 ev = eta(p.coords);
  const Vec4 acc = oracle_covderiv(s, p, ev, ev, directional_derivative(eta, p.coords, ev));
  EXPECT_LT((acc + profile_eval(s, 3.0).ffp * ev).norm(), 1e-8);
}

TEST(Ambient, DistributionIsInvolutive) {
  Profile s(schwarzschild());
  const auto xi = xi_field(s);
  // E = a(p) ξ + V(p) lies in the distribution orthogonal to ξ.
  VectorFieldFn e1 = [&](const Vec4& c) {
    return Vec4(std::sin(c(2)) * xi(c) + Vec4(0, 0, std::cos(c(0) + c(3)), c(1) * 0.1));
  };
  VectorFieldFn e2 = [&](const Vec4& c) {
    return Vec4(c(0) * c(1) * 0.05 * xi(c) + Vec4(0, 0, 0.2 * c(1), std::sin(c(2) * c(3))));
  };
  Sampler smp;
  for (int n = 0; n < 50; ++n) {
    const auto p = smp.sphere_point(2.5, 10);
    EXPECT_LT(std::abs(involutivity_residual(s, p, e1, e2)), 1e-8);
  }
  // A field with a ∂t part outside the distribution breaks it.
  VectorFieldFn bad = [](const Vec4& c) { return Vec4(std::sin(c(2)), 0, 0, 0); };
  VectorFieldFn along = [](const Vec4&) { return Vec4(0, 0, 1, 0); };
  AmbientPoint p;
  p.chart = FiberChart::SpherePolarZ;
  p.coords = Vec4(0, 4, 0.5, 0);
  EXPECT_GT(std::abs(involutivity_residual(s, p, bad, along)), 0.5);
}

TEST(Ambient, SphereAtlas) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int n = 0; n < 1000; ++n) {
    const Vec3 p = Vec3(nd(rng), nd(rng), nd(rng)).normalized();
    const auto chart = best_sphere_chart(p);
    const Vec2 c = sphere_chart_coords(chart, p);
    EXPECT_GE(std::sin(c(0)), 1.0 / std::sqrt(2.0) - 1e-12);
    EXPECT_LT((sphere_chart_point(chart, c) - p).norm(), 1e-12);
  }
}

TEST(Ambient, OracleBoundaries) {
  Profile s(schwarzschild());
  AmbientPoint p;
  p.chart = FiberChart::SpherePolarZ;
  p.coords = Vec4(0.0, 2.001, 1.0, 0.0);
  EXPECT_THROW(oracle_christoffel(s, p), BoundaryError);
  p.coords = Vec4(0.0, 4.0, 0.005, 0.0);
  EXPECT_THROW(oracle_christoffel(s, p), BoundaryError);
}
