#include "leafgeom/immersion.hpp"

#include "leafgeom/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace leafgeom {

namespace {

constexpr double kSpacelikeMargin = 1e-10;

void check_fiber(const FiberDiscretization& fd, const Profile& prof) {
  if (prof.fiber_dim() != 2)
    throw UnsupportedDimension("immersions are implemented for two-dimensional fibers only");
  (void)fd;
}

void check_domain(const Profile& prof, const ScalarField& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !prof.domain().contains(v[i]))
      throw DomainError("point " + std::to_string(i) + ": r = " + std::to_string(v[i]) +
                        " is outside the exterior domain");
  }
}

double covector_norm(const Mat2& gf, const Vec2& w) {
  return std::sqrt(std::max(0.0, w.dot(gf.inverse() * w)));
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::LeafXi: return "leaf_xi";
    case Provenance::LeafEta: return "leaf_eta";
    case Provenance::Slice: return "slice";
    case Provenance::Graph: return "graph";
  }
  return "graph";
}

ScalarField sample_field(const FiberDiscretization& fd, const Expression& e) {
  ScalarField out(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    auto vals = fd.variable_values(i);
    out[i] = e(vals);
  }
  return out;
}

bool Immersion::is_leaf() const {
  return provenance_ == Provenance::LeafXi || provenance_ == Provenance::LeafEta;
}

Immersion Immersion::from_leaf_section(std::shared_ptr<const Profile> prof, LeafFamily family,
                                       double c, ScalarField v,
                                       std::shared_ptr<const FiberDiscretization> fd) {
  check_fiber(*fd, *prof);
  if (v.size() != fd->size()) throw ConfigError("section size does not match the fiber");
  check_domain(*prof, v);
  Immersion im;
  im.prof_ = std::move(prof);
  im.fd_ = std::move(fd);
  im.provenance_ = family == LeafFamily::Xi ? Provenance::LeafXi : Provenance::LeafEta;
  im.c_ = c;
  const double sign = family == LeafFamily::Xi ? 1.0 : -1.0;
  im.v_ = std::move(v);
  im.u_.resize(im.v_.size());
  for (std::size_t i = 0; i < im.v_.size(); ++i)
    im.u_[i] = c + sign * tortoise(*im.prof_, im.v_[i]);
  im.dv_ = im.fd_->differential(im.v_);
  // The leaf relation du = ±dv/f² holds exactly; use it instead of
  // differentiating the tortoise composition numerically.
  im.du_.resize(im.v_.size());
  for (std::size_t i = 0; i < im.v_.size(); ++i)
    im.du_[i] = sign * im.dv_[i] / im.prof_->eval(im.v_[i]).f2;
  im.finish();
  return im;
}

Immersion Immersion::from_slice(std::shared_ptr<const Profile> prof, double t0, double r0,
                                std::shared_ptr<const FiberDiscretization> fd) {
  check_fiber(*fd, *prof);
  Immersion im;
  im.prof_ = std::move(prof);
  im.fd_ = std::move(fd);
  im.provenance_ = Provenance::Slice;
  im.c_ = t0;
  im.u_.assign(im.fd_->size(), t0);
  im.v_.assign(im.fd_->size(), r0);
  check_domain(*im.prof_, im.v_);
  im.du_.assign(im.fd_->size(), Vec2::Zero());
  im.dv_.assign(im.fd_->size(), Vec2::Zero());
  im.finish();
  return im;
}

Immersion Immersion::from_graph(std::shared_ptr<const Profile> prof, ScalarField u, ScalarField v,
                                std::shared_ptr<const FiberDiscretization> fd) {
  check_fiber(*fd, *prof);
  if (u.size() != fd->size() || v.size() != fd->size())
    throw ConfigError("graph fields do not match the fiber");
  check_domain(*prof, v);
  Immersion im;
  im.prof_ = std::move(prof);
  im.fd_ = std::move(fd);
  im.provenance_ = Provenance::Graph;
  im.u_ = std::move(u);
  im.v_ = std::move(v);
  im.du_ = im.fd_->differential(im.u_);
  im.dv_ = im.fd_->differential(im.v_);
  im.finish();

  for (std::size_t i = 0; i < im.size(); ++i) {
    // Smallest eigenvalue of the induced metric relative to g_F.
    const Mat2 gf = im.fd_->baseline_metric(i);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(im.metric_[i], gf,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= kSpacelikeMargin)
      throw NotSpacelike(i, "induced metric is not positive definite at point " +
                                std::to_string(i));
  }
  return im;
}

void Immersion::finish() {
  const std::size_t n = v_.size();
  lambda_.resize(n);
  metric_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = prof_->warping(base_point(i)).value;
    lambda_[i] = lam;
    const Mat2 gf = fd_->baseline_metric(i);
    if (provenance_ == Provenance::Graph) {
      const double f2 = prof_->eval(v_[i]).f2;
      metric_[i] = lam * lam * gf - f2 * du_[i] * du_[i].transpose() +
                   dv_[i] * dv_[i].transpose() / f2;
    } else {
      metric_[i] = lam * lam * gf;
    }
  }
}

Mat4 Immersion::ambient_metric_at(std::size_t i) const {
  const double f2 = prof_->eval(v_[i]).f2;
  Mat4 g = Mat4::Zero();
  g(0, 0) = -f2;
  g(1, 1) = 1.0 / f2;
  g.block<2, 2>(2, 2) = lambda_[i] * lambda_[i] * fd_->baseline_metric(i);
  return g;
}

Vec4 Immersion::push_forward(std::size_t i, const Vec2& x) const {
  return Vec4(du_[i].dot(x), dv_[i].dot(x), x(0), x(1));
}

FrameField frame_decomposition_generic(const Immersion& im) {
  const std::size_t n = im.size();
  FrameField ff;
  ff.xi_tan.resize(n);
  ff.eta_tan.resize(n);
  ff.xi_perp.resize(n);
  ff.eta_perp.resize(n);
  ff.ell.assign(n, Vec4::Zero());
  ff.tan_inner.resize(n);
  ff.xi_tan_norm2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const Mat2& g = im.metric()[i];
    const Mat2 ginv = g.inverse();
    const Vec2 gu = ginv * im.du()[i];
    const Vec2 gv = ginv * im.dv()[i];
    ff.xi_tan[i] = gv / f2 - gu;
    ff.eta_tan[i] = -0.5 * (gv + f2 * gu);
    const Vec4 xi(1.0 / f2, 1.0, 0.0, 0.0);
    const Vec4 eta(0.5, -0.5 * f2, 0.0, 0.0);
    ff.xi_perp[i] = xi - im.push_forward(i, ff.xi_tan[i]);
    ff.eta_perp[i] = eta - im.push_forward(i, ff.eta_tan[i]);
    ff.tan_inner[i] = ff.xi_tan[i].dot(g * ff.eta_tan[i]);
    ff.xi_tan_norm2[i] = ff.xi_tan[i].dot(g * ff.xi_tan[i]);
  }
  return ff;
}

FrameField frame_decomposition(const Immersion& im) {
  if (!im.is_leaf() && im.provenance() != Provenance::Slice) return frame_decomposition_generic(im);

  const std::size_t n = im.size();
  FrameField ff;
  ff.xi_tan.resize(n);
  ff.eta_tan.resize(n);
  ff.xi_perp.resize(n);
  ff.eta_perp.resize(n);
  ff.ell.assign(n, Vec4::Zero());
  ff.tan_inner.resize(n);
  ff.xi_tan_norm2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const Mat2& g = im.metric()[i];
    const Vec2 gv = g.inverse() * im.dv()[i];
    const double gv2 = im.dv()[i].dot(gv);
    const Vec4 xi(1.0 / f2, 1.0, 0.0, 0.0);
    const Vec4 eta(0.5, -0.5 * f2, 0.0, 0.0);
    switch (im.provenance()) {
      case Provenance::LeafXi:
        ff.xi_tan[i] = Vec2::Zero();
        ff.eta_tan[i] = -gv;
        break;
      case Provenance::LeafEta:
        ff.xi_tan[i] = 2.0 * gv / f2;
        ff.eta_tan[i] = Vec2::Zero();
        break;
      default:
        ff.xi_tan[i] = Vec2::Zero();
        ff.eta_tan[i] = Vec2::Zero();
        break;
    }
    ff.xi_perp[i] = xi - im.push_forward(i, ff.xi_tan[i]);
    ff.eta_perp[i] = eta - im.push_forward(i, ff.eta_tan[i]);
    if (im.provenance() == Provenance::LeafXi || im.provenance() == Provenance::Slice)
      ff.ell[i] = -0.5 * gv2 * xi + ff.eta_perp[i];
    else if (im.provenance() == Provenance::LeafEta)
      ff.ell[i] = ff.xi_perp[i] - (2.0 * gv2 / (f2 * f2)) * eta;
    ff.tan_inner[i] = ff.xi_tan[i].dot(g * ff.eta_tan[i]);
    ff.xi_tan_norm2[i] = ff.xi_tan[i].dot(g * ff.xi_tan[i]);
  }
  return ff;
}

double measured_gradient_error(const FiberDiscretization& fd) {
  const std::size_t n = fd.size();
  ScalarField s(n);
  std::vector<Vec2> exact(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = fd.position(i);
    if (fd.surface() == SurfaceKind::Sphere) {
      s[i] = p.z();
      if (fd.is_mesh()) {
        const auto& b = fd.mesh().tangent_basis(i);
        exact[i] = Vec2(b[0].z(), b[1].z());
      } else {
        exact[i] = Vec2(-std::sin(fd.grid().coord(i)(0)), 0.0);
      }
    } else {
      s[i] = std::sin(p.x()) + std::cos(p.y());
      exact[i] = Vec2(std::cos(p.x()), -std::sin(p.y()));
    }
  }
  const auto ds = fd.differential(s);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2 gf = fd.baseline_metric(i);
    err = std::max(err, covector_norm(gf, ds[i] - exact[i]));
    scale = std::max(scale, covector_norm(gf, exact[i]));
  }
  return err / scale;
}

FactoringResult factoring_test(const Immersion& im, double tol) {
  const auto& fd = im.fiber();
  const std::size_t n = im.size();
  FactoringResult res;
  res.pointwise_xi.resize(n);
  res.pointwise_eta.resize(n);
  double du_max = 0.0, dv_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2 gf = fd.baseline_metric(i);
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const Vec2 a = im.dv()[i] - f2 * im.du()[i];
    const Vec2 b = im.dv()[i] + f2 * im.du()[i];
    res.pointwise_xi[i] = covector_norm(gf, a);
    res.pointwise_eta[i] = covector_norm(gf, b);
    du_max = std::max(du_max, f2 * covector_norm(gf, im.du()[i]));
    dv_max = std::max(dv_max, covector_norm(gf, im.dv()[i]));
  }
  res.residual_xi = *std::max_element(res.pointwise_xi.begin(), res.pointwise_xi.end());
  res.residual_eta = *std::max_element(res.pointwise_eta.begin(), res.pointwise_eta.end());
  if (tol <= 0.0)
    tol = 10.0 * measured_gradient_error(fd) * std::max(du_max, dv_max) + 1e-10;
  res.tolerance = tol;

  if (du_max <= tol && dv_max <= tol)
    res.kind = Provenance::Slice;
  else if (res.residual_xi <= tol)
    res.kind = Provenance::LeafXi;
  else if (res.residual_eta <= tol)
    res.kind = Provenance::LeafEta;
  else
    res.kind = Provenance::Graph;
  return res;
}

double integrate(const Immersion& im, std::span<const double> s) {
  const auto& fd = im.fiber();
  if (fd.is_mesh()) {
    const auto& w = fd.mesh().mass();
    double acc = 0.0;
    for (std::size_t i = 0; i < im.size(); ++i)
      acc += s[i] * w[i] * std::sqrt(im.metric()[i].determinant());
    return acc;
  }
  const auto& grid = fd.grid();
  if (!grid.periodic_rows())
    throw UnsupportedSurface("integration needs a closed discretization; the sphere chart grid is a band");
  double acc = 0.0;
  for (std::size_t i = 0; i < im.size(); ++i) acc += s[i] * std::sqrt(im.metric()[i].determinant());
  return acc * grid.h0() * grid.h1();
}

LocalDiffeoReport local_diffeo_check(const Immersion& im) {
  LocalDiffeoReport rep;
  rep.jacobian_bound.resize(im.size());
  for (std::size_t i = 0; i < im.size(); ++i)
    rep.jacobian_bound[i] = im.lambda()[i] * im.lambda()[i];
  rep.min_bound = *std::min_element(rep.jacobian_bound.begin(), rep.jacobian_bound.end());
  return rep;
}

double leaf_tangency_witness(const Immersion& im) {
  const auto& fd = im.fiber();
  const auto& u = im.u();
  const auto& v = im.v();
  double worst = 0.0;
  auto edge = [&](std::size_t i, std::size_t j, double len) {
    const double f2 = im.profile().eval(0.5 * (v[i] + v[j])).f2;
    const double w = -(u[j] - u[i]) + (v[j] - v[i]) / f2;
    worst = std::max(worst, std::abs(w) / len);
  };
  if (fd.is_mesh()) {
    const auto& mesh = fd.mesh();
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const auto& c = mesh.corners(t);
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k], b = tri[(k + 1) % 3];
        edge(a, b, (c[(k + 1) % 3] - c[k]).norm());
      }
    }
  } else {
    const auto& grid = fd.grid();
    for (int i = 0; i < grid.rows(); ++i) {
      for (int j = 0; j < grid.cols(); ++j) {
        const std::size_t k = grid.index(i, j);
        const Mat2 gf = grid.baseline_metric(k);
        const std::size_t right = grid.index(i, (j + 1) % grid.cols());
        edge(k, right, grid.h1() * std::sqrt(gf(1, 1)));
        if (i + 1 < grid.rows() || grid.periodic_rows()) {
          const std::size_t down = grid.index((i + 1) % grid.rows(), j);
          edge(k, down, grid.h0() * std::sqrt(gf(0, 0)));
        }
      }
    }
  }
  return worst;
}

}  // namespace leafgeom
