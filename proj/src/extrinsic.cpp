#include "leafgeom/extrinsic.hpp"

#include "leafgeom/errors.hpp"
#include "leafgeom/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace leafgeom {

namespace {

constexpr int kDim = 2;

Vec4 xi_vec(double f2) { return Vec4(1.0 / f2, 1.0, 0.0, 0.0); }
Vec4 eta_vec(double f2) { return Vec4(0.5, -0.5 * f2, 0.0, 0.0); }

double inner(const Immersion& im, std::size_t i, const Vec4& a, const Vec4& b) {
  return a.dot(im.ambient_metric_at(i) * b);
}

FiberChart grid_chart(const FiberDiscretization& fd) {
  return fd.surface() == SurfaceKind::Sphere ? FiberChart::SpherePolarZ : FiberChart::Flat;
}

void require_leaf(const Immersion& im, const char* what) {
  if (im.provenance() == Provenance::Graph)
    throw ConfigError(std::string(what) + " needs a leaf or slice immersion");
}

void require_radial(const Immersion& im, const char* what) {
  if (im.profile().spec().warping.kind() != WarpingKind::RadialR)
    throw ConfigError(std::string(what) + " needs the warping function λ = r");
}

// g-norm of a covector.
double conorm(const Mat2& g, const Vec2& w) { return std::sqrt(std::max(0.0, w.dot(g.inverse() * w))); }

SecondFundamentalForm run_oracle(const Immersion& im, const OracleOptions& opt, bool parallel) {
  const auto& fd = im.fiber();
  if (fd.is_mesh())
    throw UnsupportedBackend("the second fundamental form oracle needs a chart grid");
  const auto& grid = fd.grid();
  const auto du = grid.derivatives(im.u());
  const auto dv = grid.derivatives(im.v());
  auto field = parallel ? kernels::oracle_second_form(im.profile(), grid, grid_chart(fd), im.u(),
                                                      im.v(), du, dv, opt)
                        : kernels::reference::oracle_second_form(im.profile(), grid, grid_chart(fd),
                                                                 im.u(), im.v(), du, dv, opt);
  return {std::move(field.II), std::move(field.H)};
}

}  // namespace

LeafSide leaf_side(const Immersion& im) {
  switch (im.provenance()) {
    case Provenance::LeafEta: return LeafSide::Eta;
    case Provenance::LeafXi:
    case Provenance::Slice: return LeafSide::Xi;
    default: throw ConfigError("graph immersions have no leaf side");
  }
}

IntrinsicFields intrinsic_fields(const Immersion& im) {
  const auto& fd = im.fiber();
  IntrinsicFields out;
  if (fd.is_mesh()) {
    if (im.provenance() == Provenance::Graph)
      throw UnsupportedBackend("mesh operators need a conformal induced metric (leaf or slice)");
    out.laplacian = laplacian(fd, im.lambda(), im.v());
    out.grad_norm2 = grad_norm2(fd, im.lambda(), im.v());
    return out;
  }
  const auto& grid = fd.grid();
  const auto geo = metric_geometry(grid, im.metric());
  out.laplacian = grid_laplacian(grid, geo, im.v());
  out.grad_norm2 = grid_grad_norm2(grid, geo, im.v());
  out.hessian = grid_hessian(grid, geo, im.v());
  return out;
}

CurvatureFields curvature_fields(const Immersion& im) {
  require_leaf(im, "curvature fields");
  const ScalarField ones(im.size(), 1.0);
  return {scalar_curvature(im.fiber(), ones, im.profile().fiber_dim()),
          scalar_curvature(im.fiber(), im.lambda(), im.profile().fiber_dim())};
}

SecondFundamentalForm second_fundamental_form_oracle(const Immersion& im, const OracleOptions& opt) {
  return run_oracle(im, opt, true);
}

SecondFundamentalForm second_fundamental_form_oracle_serial(const Immersion& im,
                                                            const OracleOptions& opt) {
  return run_oracle(im, opt, false);
}

MeanCurvature mean_curvature(const Immersion& im, const IntrinsicFields& fields) {
  require_leaf(im, "closed-form mean curvature");
  const LeafSide side = leaf_side(im);
  const auto frame = frame_decomposition(im);
  const std::size_t n = im.size();
  MeanCurvature out;
  out.normal_coeffs.resize(n);
  out.null_coeffs.resize(n);
  out.vector.resize(n);
  out.norm2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = null_weingarten_factor(im.profile(), im.base_point(i));
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const double grad2 = fields.grad_norm2[i];
    const double lap = fields.laplacian[i];
    if (side == LeafSide::Xi) {
      const double a = w.eta - w.xi * grad2 + lap / kDim;
      out.normal_coeffs[i] = Vec2(a, w.xi);
      out.null_coeffs[i] = Vec2(a + 0.5 * w.xi * grad2, w.xi);
    } else {
      const double b = w.xi - 4.0 * w.eta * grad2 / (f2 * f2) - 2.0 * lap / (kDim * f2);
      out.normal_coeffs[i] = Vec2(w.eta, b);
      out.null_coeffs[i] = Vec2(b + 2.0 * w.eta * grad2 / (f2 * f2), w.eta);
    }
    out.vector[i] = out.normal_coeffs[i](0) * frame.xi_perp[i] +
                    out.normal_coeffs[i](1) * frame.eta_perp[i];
    out.norm2[i] = -2.0 * out.null_coeffs[i](0) * out.null_coeffs[i](1);
  }
  return out;
}

MeanCurvature mean_curvature(const Immersion& im) {
  return mean_curvature(im, intrinsic_fields(im));
}

MeanCurvature mean_curvature_from_vectors(const Immersion& im, std::vector<Vec4> h) {
  const auto frame = frame_decomposition(im);
  const std::size_t n = im.size();
  MeanCurvature out;
  out.normal_coeffs.resize(n);
  out.null_coeffs.assign(n, Vec2::Zero());
  out.norm2.resize(n);
  const bool leaf = im.provenance() != Provenance::Graph;
  const bool eta_side = im.provenance() == Provenance::LeafEta;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat4 G = im.ambient_metric_at(i);
    const Vec4& a = frame.xi_perp[i];
    const Vec4& b = frame.eta_perp[i];
    Mat2 gram;
    gram << a.dot(G * a), a.dot(G * b), b.dot(G * a), b.dot(G * b);
    out.normal_coeffs[i] = gram.inverse() * Vec2(a.dot(G * h[i]), b.dot(G * h[i]));
    out.norm2[i] = h[i].dot(G * h[i]);
    if (leaf) {
      const double f2 = im.profile().eval(im.v()[i]).f2;
      const Vec4 gen = eta_side ? eta_vec(f2) : xi_vec(f2);
      // g̃(ζ, ℓ) = -1 with ζ, ℓ lightlike.
      out.null_coeffs[i] = Vec2(-frame.ell[i].dot(G * h[i]), -gen.dot(G * h[i]));
    }
  }
  out.vector = std::move(h);
  return out;
}

MeanCurvature mean_curvature_oracle(const Immersion& im, const OracleOptions& opt) {
  auto sff = second_fundamental_form_oracle(im, opt);
  return mean_curvature_from_vectors(im, std::move(sff.H));
}

NormRoutes mean_curvature_norm(const Immersion& im) {
  require_leaf(im, "mean curvature norm routes");
  require_radial(im, "the curvature route for ‖H‖²");
  if (im.profile().fiber_dim() != 2)
    throw UnsupportedDimension("the curvature route for ‖H‖² is implemented for surfaces");
  const auto fields = intrinsic_fields(im);
  const auto h = mean_curvature(im, fields);
  const auto curv = curvature_fields(im);
  NormRoutes out;
  out.frame = h.norm2;
  out.curvature.resize(im.size());
  const double mm1 = kDim * (kDim - 1);
  for (std::size_t i = 0; i < im.size(); ++i) {
    const double v = im.v()[i];
    const double f2 = im.profile().eval(v).f2;
    out.curvature[i] = (f2 - (curv.fiber[i] - v * v * curv.induced[i]) / mm1) / (v * v);
    out.max_gap = std::max(out.max_gap, std::abs(out.curvature[i] - out.frame[i]));
  }
  return out;
}

ScalarField generator_shape_factor(const Immersion& im) {
  const LeafSide side = leaf_side(im);
  ScalarField out(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const auto w = null_weingarten_factor(im.profile(), im.base_point(i));
    out[i] = side == LeafSide::Xi ? -w.xi : -w.eta;
  }
  return out;
}

ShapeOperators shape_operators_closed(const Immersion& im, const IntrinsicFields& fields) {
  if (fields.hessian.empty())
    throw UnsupportedBackend("shape operators need the Hessian of v, available on chart grids");
  ShapeOperators out;
  out.side = leaf_side(im);
  out.generator.resize(im.size());
  out.transverse.resize(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const auto w = null_weingarten_factor(im.profile(), im.base_point(i));
    const Mat2 hess = im.metric()[i].inverse() * fields.hessian[i];
    if (out.side == LeafSide::Xi) {
      out.generator[i] = -w.xi * Mat2::Identity();
      out.transverse[i] = -w.eta * Mat2::Identity() - hess;
    } else {
      const double f2 = im.profile().eval(im.v()[i]).f2;
      out.generator[i] = -w.eta * Mat2::Identity();
      out.transverse[i] = -w.xi * Mat2::Identity() + (2.0 / f2) * hess;
    }
  }
  return out;
}

ShapeOperators shape_operators_oracle(const Immersion& im, const SecondFundamentalForm& sff) {
  ShapeOperators out;
  out.side = leaf_side(im);
  const auto frame = frame_decomposition(im);
  out.generator.resize(im.size());
  out.transverse.resize(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const Mat4 G = im.ambient_metric_at(i);
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const Vec4 gen = out.side == LeafSide::Xi ? xi_vec(f2) : eta_vec(f2);
    const Vec4 trans = out.side == LeafSide::Xi ? frame.eta_perp[i] : frame.xi_perp[i];
    const Mat2 ginv = im.metric()[i].inverse();
    auto form = [&](const Vec4& zeta) {
      Mat2 m;
      const auto& II = sff.II[i];
      m << II[0].dot(G * zeta), II[1].dot(G * zeta), II[1].dot(G * zeta), II[2].dot(G * zeta);
      return Mat2(ginv * m);
    };
    out.generator[i] = form(gen);
    out.transverse[i] = form(trans);
  }
  return out;
}

UmbilicReport umbilic_test(const Immersion& im, NormalDirection dir, const IntrinsicFields& fields) {
  if (fields.hessian.empty())
    throw UnsupportedBackend("the umbilic test needs the Hessian of v, available on chart grids");
  const auto p = im.provenance();
  if ((p == Provenance::LeafXi && dir != NormalDirection::EtaPerp) ||
      (p == Provenance::LeafEta && dir != NormalDirection::XiPerp) || p == Provenance::Graph)
    throw ConfigError("umbilic direction does not match the leaf family");
  UmbilicReport out;
  out.factor.resize(im.size());
  out.deviation.resize(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const Mat2 a = im.metric()[i].inverse() * fields.hessian[i];
    const double h = a.trace() / kDim;
    out.factor[i] = h;
    out.deviation[i] = std::sqrt(std::max(0.0, -(a - h * Mat2::Identity()).determinant()));
  }
  return out;
}

NormalConnection normal_connection(const Immersion& im, const std::vector<Vec2>& V,
                                   const ShapeOperators& shape) {
  const LeafSide side = leaf_side(im);
  const auto frame = frame_decomposition(im);
  NormalConnection out;
  out.generator.resize(im.size());
  out.transverse.resize(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const auto w = null_weingarten_factor(im.profile(), im.base_point(i));
    const auto pv = im.profile().eval(im.v()[i]);
    const Mat4 G = im.ambient_metric_at(i);
    const Mat2& g = im.metric()[i];
    const Vec2 grad_v = g.inverse() * im.dv()[i];
    const double gv = im.dv()[i].dot(V[i]);  // g(∇v, V)

    const Vec4 gen = side == LeafSide::Xi ? xi_vec(pv.f2) : eta_vec(pv.f2);
    const Vec4 trans = side == LeafSide::Xi ? frame.eta_perp[i] : frame.xi_perp[i];
    // II(∇v, V) from g̃(II(X, Y), ζ) = g(A_ζ X, Y) in the normal basis {gen, trans}.
    Mat2 gram;
    gram << gen.dot(G * gen), gen.dot(G * trans), trans.dot(G * gen), trans.dot(G * trans);
    const Vec2 rhs((shape.generator[i] * grad_v).dot(g * V[i]),
                   (shape.transverse[i] * grad_v).dot(g * V[i]));
    const Vec2 c = gram.inverse() * rhs;
    const Vec4 II = c(0) * gen + c(1) * trans;

    if (side == LeafSide::Xi) {
      out.generator[i] = -w.xi * gv * gen;
      out.transverse[i] = -w.eta * gv * gen + II;
    } else {
      out.generator[i] = (2.0 / pv.f2) * (pv.ffp + w.eta) * gv * gen;
      out.transverse[i] =
          (2.0 / pv.f2) * (gv * (-pv.ffp * frame.xi_perp[i] + w.xi * eta_vec(pv.f2)) - II);
    }
  }
  return out;
}

ScalarField parallel_H_residual(const Immersion& im) {
  const LeafSide side = leaf_side(im);
  ScalarField out(im.size());
  for (std::size_t i = 0; i < im.size(); ++i) {
    const auto d = warping_frame_derivatives(im.profile(), im.base_point(i));
    const auto pv = im.profile().eval(im.v()[i]);
    const double grad = conorm(im.metric()[i], im.dv()[i]);
    if (side == LeafSide::Xi)
      out[i] = grad * std::abs(d.xi_xi / d.lambda);
    else
      out[i] = grad * 2.0 * std::abs((d.eta_eta + pv.ffp * d.eta) / (d.lambda * pv.f2));
  }
  return out;
}

ScalarField parallel_H_residual_derived(const Immersion& im) {
  const LeafSide side = leaf_side(im);
  const auto h = mean_curvature(im);
  const std::size_t n = im.size();
  ScalarField hz(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f2 = im.profile().eval(im.v()[i]).f2;
    const Vec4 gen = side == LeafSide::Xi ? xi_vec(f2) : eta_vec(f2);
    hz[i] = inner(im, i, h.vector[i], gen);
    const auto nw = null_weingarten_factor(im.profile(), im.base_point(i));
    w[i] = side == LeafSide::Xi ? nw.xi : nw.eta;
  }
  const auto dhz = im.fiber().differential(hz);
  ScalarField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pv = im.profile().eval(im.v()[i]);
    // g̃(∇^⊥_V H, ζ) = V(g̃(H, ζ)) - g̃(H, ∇^⊥_V ζ); the connection term is a
    // multiple of dv(V).
    const double conn = side == LeafSide::Xi ? -w[i] * hz[i]
                                             : (2.0 / pv.f2) * (pv.ffp + w[i]) * hz[i];
    out[i] = conorm(im.metric()[i], dhz[i] - conn * im.dv()[i]);
  }
  return out;
}

std::string to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Minimal: return "minimal";
    case CausalClass::Untrapped: return "untrapped";
    case CausalClass::MarginallyTrapped: return "marginally_trapped";
    case CausalClass::WeaklyTrapped: return "weakly_trapped";
    case CausalClass::Trapped: return "trapped";
    case CausalClass::Mixed: return "mixed";
  }
  return "mixed";
}

std::string to_string(TimeOrientation o) {
  switch (o) {
    case TimeOrientation::Future: return "future";
    case TimeOrientation::Past: return "past";
    case TimeOrientation::None: return "none";
  }
  return "none";
}

CausalReport causal_classification(const Immersion& im, const MeanCurvature& h,
                                   const IntrinsicFields* fields, double rel_band) {
  const std::size_t n = im.size();
  CausalReport out;
  out.point_class.resize(n);
  out.orientation.resize(n);
  ScalarField size(n), time(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::sqrt(im.profile().eval(im.v()[i]).f2);
    time[i] = inner(im, i, h.vector[i], Vec4(1.0 / f, 0.0, 0.0, 0.0));
    size[i] = h.norm2[i] + 2.0 * time[i] * time[i];
    scale = std::max(scale, size[i]);
  }
  out.band = rel_band * scale;

  bool any = false, trapped = false, marginal = false, untrapped = false;
  bool future = false, past = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (size[i] <= out.band) {
      out.point_class[i] = CausalClass::Minimal;
      out.orientation[i] = TimeOrientation::None;
      continue;
    }
    any = true;
    const double n2 = h.norm2[i];
    if (n2 > out.band) {
      out.point_class[i] = CausalClass::Untrapped;
      out.orientation[i] = TimeOrientation::None;
      untrapped = true;
      continue;
    }
    out.point_class[i] = n2 < -out.band ? CausalClass::Trapped : CausalClass::MarginallyTrapped;
    (n2 < -out.band ? trapped : marginal) = true;
    // ∂t is future; a causal vector is future pointing iff g̃(H, ∂t) < 0.
    out.orientation[i] = time[i] < 0.0 ? TimeOrientation::Future : TimeOrientation::Past;
    (time[i] < 0.0 ? future : past) = true;
  }
  // Zeros of H do not change the global class.
  if (!any)
    out.verdict = CausalClass::Minimal;
  else if (untrapped)
    out.verdict = (trapped || marginal) ? CausalClass::Mixed : CausalClass::Untrapped;
  else if (trapped && marginal)
    out.verdict = CausalClass::WeaklyTrapped;
  else
    out.verdict = trapped ? CausalClass::Trapped : CausalClass::MarginallyTrapped;
  if ((trapped || marginal) && !untrapped && future != past)
    out.verdict_orientation = future ? TimeOrientation::Future : TimeOrientation::Past;

  if (fields && im.provenance() != Provenance::Graph &&
      im.profile().spec().warping.kind() == WarpingKind::RadialR) {
    out.predicate_residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = im.v()[i];
      const double f2 = im.profile().eval(v).f2;
      out.predicate_residual[i] =
          2.0 * v * fields->laplacian[i] - kDim * (f2 + fields->grad_norm2[i]);
    }
  }
  return out;
}

ExtrinsicReport extrinsic_report(const Immersion& im) {
  ExtrinsicReport rep;
  rep.provenance = im.provenance();
  const bool leaf = im.provenance() != Provenance::Graph;
  std::optional<IntrinsicFields> fields;
  if (leaf || !im.fiber().is_mesh()) fields = intrinsic_fields(im);
  if (leaf) {
    rep.closed_form = true;
    rep.H = mean_curvature(im, *fields);
    rep.parallel_residual = parallel_H_residual(im);
    if (!fields->hessian.empty()) {
      const auto shape = shape_operators_closed(im, *fields);
      rep.shape_spectrum.resize(im.size());
      for (std::size_t i = 0; i < im.size(); ++i) {
        // A is g-selfadjoint: eigenvalues of g A against g.
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(
            im.metric()[i] * shape.transverse[i], im.metric()[i], Eigen::EigenvaluesOnly);
        rep.shape_spectrum[i] = es.eigenvalues();
      }
      rep.umbilic = umbilic_test(im,
                                 leaf_side(im) == LeafSide::Xi ? NormalDirection::EtaPerp
                                                               : NormalDirection::XiPerp,
                                 *fields);
    }
  } else {
    rep.H = mean_curvature_oracle(im);
  }
  rep.causal = causal_classification(im, rep.H, fields ? &*fields : nullptr);
  return rep;
}

}  // namespace leafgeom
