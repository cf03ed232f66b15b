#include "leafgeom/warped.hpp"

#include "leafgeom/errors.hpp"

#include <cmath>
#include <sstream>

namespace leafgeom {

namespace {

constexpr double kPoleMargin = 1e-2;

}  // namespace

Mat2 fiber_metric(FiberChart chart, const Vec2& x) {
  Mat2 g = Mat2::Identity();
  if (chart != FiberChart::Flat) {
    const double s = std::sin(x(0));
    g(1, 1) = s * s;
  }
  return g;
}

std::array<Mat2, 2> fiber_christoffel(FiberChart chart, const Vec2& x) {
  std::array<Mat2, 2> c{Mat2::Zero(), Mat2::Zero()};
  if (chart == FiberChart::Flat) return c;
  const double s = std::sin(x(0)), co = std::cos(x(0));
  c[0](1, 1) = -s * co;
  c[1](0, 1) = c[1](1, 0) = co / s;
  return c;
}

Vec2 sphere_chart_coords(FiberChart chart, const Vec3& p) {
  // Polar axis and the two in-plane axes for each chart.
  const Vec3 q = chart == FiberChart::SpherePolarZ ? p : Vec3(p(1), p(2), p(0));
  const double theta = std::acos(std::clamp(q(2), -1.0, 1.0));
  return {theta, std::atan2(q(1), q(0))};
}

Vec3 sphere_chart_point(FiberChart chart, const Vec2& c) {
  const Vec3 q(std::sin(c(0)) * std::cos(c(1)), std::sin(c(0)) * std::sin(c(1)), std::cos(c(0)));
  return chart == FiberChart::SpherePolarZ ? q : Vec3(q(2), q(0), q(1));
}

FiberChart best_sphere_chart(const Vec3& p) {
  return std::abs(p(2)) <= std::abs(p(0)) ? FiberChart::SpherePolarZ : FiberChart::SpherePolarX;
}

Mat4 ambient_metric(const Profile& prof, const AmbientPoint& p) {
  const BasePoint b = p.base();
  const double f2 = prof.eval(b.r).f2;
  const double lam = prof.warping(b).value;
  Mat4 g = Mat4::Zero();
  g(0, 0) = -f2;
  g(1, 1) = 1.0 / f2;
  g.block<2, 2>(2, 2) = lam * lam * fiber_metric(p.chart, p.fiber());
  return g;
}

double ambient_inner(const Profile& prof, const AmbientPoint& p, const Vec4& a, const Vec4& b) {
  return a.dot(ambient_metric(prof, p) * b);
}

Vec4 Christoffel::contract(const Vec4& x, const Vec4& y) const {
  Vec4 out;
  for (int k = 0; k < 4; ++k) out(k) = x.dot(gamma[static_cast<std::size_t>(k)] * y);
  return out;
}

Christoffel closed_christoffel(const Profile& prof, const AmbientPoint& p) {
  const BasePoint b = p.base();
  const auto base = base_connection(prof, b);
  const auto grads = base_gradients(prof, b);
  const auto jet = prof.warping(b);
  const auto fib = fiber_christoffel(p.chart, p.fiber());
  const Mat2 gf = fiber_metric(p.chart, p.fiber());
  Christoffel c;
  // Base block.
  c.gamma[1](0, 0) = base.r_tt;
  c.gamma[0](0, 1) = c.gamma[0](1, 0) = base.t_tr;
  c.gamma[1](1, 1) = base.r_rr;
  // Mixed: ∇_X V = ∇_V X = (Xλ/λ) V.
  const double dl[2] = {jet.lt / jet.value, jet.lr / jet.value};
  for (int i = 2; i < 4; ++i) {
    for (int a = 0; a < 2; ++a) {
      c.gamma[static_cast<std::size_t>(i)](a, i) = dl[a];
      c.gamma[static_cast<std::size_t>(i)](i, a) = dl[a];
    }
  }
  // Fiber-fiber: -(g̃(V, W)/λ) ∇^B λ + ∇^F_V W.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double w = -jet.value * gf(i, j);
      c.gamma[0](2 + i, 2 + j) = w * grads.lambda.a_t;
      c.gamma[1](2 + i, 2 + j) = w * grads.lambda.a_r;
      for (int k = 0; k < 2; ++k) {
        c.gamma[static_cast<std::size_t>(2 + k)](2 + i, 2 + j) = fib[static_cast<std::size_t>(k)](i, j);
      }
    }
  }
  return c;
}

Vec4 closed_covderiv(const Profile& prof, const AmbientPoint& p, const Vec4& x, const Vec4& y,
                     const Vec4& dy_along_x) {
  return dy_along_x + closed_christoffel(prof, p).contract(x, y);
}

namespace {

void check_oracle_stencil(const Profile& prof, const AmbientPoint& p, double reach) {
  const double r = p.coords(1);
  const auto& dom = prof.domain();
  if (r - reach <= dom.r_min || r + reach >= dom.r_max) {
    std::ostringstream os;
    os << "oracle stencil at r = " << r << " leaves the exterior domain";
    throw BoundaryError(os.str());
  }
  if (p.chart != FiberChart::Flat) {
    const double th = p.coords(2);
    if (th - reach <= kPoleMargin || th + reach >= std::numbers::pi - kPoleMargin) {
      std::ostringstream os;
      os << "oracle stencil at theta = " << th << " reaches a chart pole";
      throw BoundaryError(os.str());
    }
  }
}

Christoffel oracle_at_step(const Profile& prof, const AmbientPoint& p, double h) {
  check_oracle_stencil(prof, p, 2.0 * h);
  // dg[l] = ∂_l g, fourth-order central differences.
  std::array<Mat4, 4> dg;
  for (int l = 0; l < 4; ++l) {
    auto shifted = [&](double s) {
      AmbientPoint q = p;
      q.coords(l) += s;
      return ambient_metric(prof, q);
    };
    dg[static_cast<std::size_t>(l)] =
        (shifted(-2 * h) - 8.0 * shifted(-h) + 8.0 * shifted(h) - shifted(2 * h)) / (12.0 * h);
  }
  const Mat4 ginv = ambient_metric(prof, p).inverse();
  Christoffel c;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (int l = 0; l < 4; ++l) {
          acc += ginv(k, l) * (dg[static_cast<std::size_t>(i)](j, l) +
                               dg[static_cast<std::size_t>(j)](i, l) -
                               dg[static_cast<std::size_t>(l)](i, j));
        }
        c.gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
      }
    }
  }
  return c;
}

}  // namespace

Christoffel oracle_christoffel(const Profile& prof, const AmbientPoint& p, const OracleOptions& opt) {
  return oracle_at_step(prof, p, opt.step);
}

double oracle_richardson_gap(const Profile& prof, const AmbientPoint& p, const OracleOptions& opt) {
  const auto a = oracle_at_step(prof, p, opt.step);
  const auto b = oracle_at_step(prof, p, 0.5 * opt.step);
  double gap = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    gap = std::max(gap, (a.gamma[k] - b.gamma[k]).cwiseAbs().maxCoeff());
  }
  return gap;
}

Vec4 oracle_covderiv(const Profile& prof, const AmbientPoint& p, const Vec4& x, const Vec4& y,
                     const Vec4& dy_along_x, const OracleOptions& opt) {
  return dy_along_x + oracle_christoffel(prof, p, opt).contract(x, y);
}

Vec4 directional_derivative(const VectorFieldFn& field, const Vec4& at, const Vec4& along,
                            double step) {
  const double h = step;
  return (field(at - 2 * h * along) - 8.0 * field(at - h * along) + 8.0 * field(at + h * along) -
          field(at + 2 * h * along)) /
         (12.0 * h);
}

double involutivity_residual(const Profile& prof, const AmbientPoint& p, const VectorFieldFn& e1,
                             const VectorFieldFn& e2, double step) {
  const Vec4 a = e1(p.coords), b = e2(p.coords);
  const Vec4 bracket = directional_derivative(e2, p.coords, a, step) -
                       directional_derivative(e1, p.coords, b, step);
  const Vec4 xi = xi_field(prof)(p.coords);
  return ambient_inner(prof, p, bracket, xi);
}

VectorFieldFn xi_field(const Profile& prof) {
  return [&prof](const Vec4& c) {
    const double f2 = profile_raw(prof.spec(), c(1)).f2;
    return Vec4(1.0 / f2, 1.0, 0.0, 0.0);
  };
}

VectorFieldFn eta_field(const Profile& prof) {
  return [&prof](const Vec4& c) {
    const double f2 = profile_raw(prof.spec(), c(1)).f2;
    return Vec4(0.5, -0.5 * f2, 0.0, 0.0);
  };
}

}  // namespace leafgeom
