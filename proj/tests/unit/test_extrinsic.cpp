#include "leafgeom/errors.hpp"
#include "leafgeom/extrinsic.hpp"
#include "leafgeom/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace leafgeom;

namespace {

using ProfilePtr = std::shared_ptr<const Profile>;
using FiberPtr = std::shared_ptr<const FiberDiscretization>;

ProfilePtr make_profile(double mass, Warping w = Warping::radial()) {
  ProfileSpec s;
  s.mass = mass;
  s.warping = std::move(w);
  return std::make_shared<const Profile>(s);
}

FiberPtr band(int rows) {
  return std::make_shared<const FiberDiscretization>(
      ChartGrid::sphere_band(rows, 2 * (rows - 1), 0.35, std::numbers::pi - 0.35));
}
FiberPtr torus(int n) { return std::make_shared<const FiberDiscretization>(ChartGrid::torus(n, n)); }
FiberPtr ico(int level) { return std::make_shared<const FiberDiscretization>(TriMesh::icosphere(level)); }

ScalarField field(const FiberDiscretization& fd, const std::string& text) {
  return sample_field(fd, Expression::parse(text, fd.variables()));
}

double max_vec_gap(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

double max_mat_gap(const std::vector<Mat2>& a, const std::vector<Mat2>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST(Extrinsic, SliceMeanCurvature) {
  auto prof = make_profile(1.0);
  for (auto fd : {ico(2), band(17)}) {
    auto im = Immersion::from_slice(prof, 0.5, 4.0, fd);
    const auto h = mean_curvature(im);
    for (std::size_t i = 0; i < im.size(); ++i) {
      EXPECT_NEAR(h.normal_coeffs[i](0), -0.0625, 1e-14);
      EXPECT_NEAR(h.normal_coeffs[i](1), 0.25, 1e-14);
      EXPECT_NEAR(h.vector[i](0), 0.0, 1e-14);
      EXPECT_NEAR(h.vector[i](1), -0.125, 1e-14);
      EXPECT_NEAR(h.norm2[i], 0.03125, 1e-14);
    }
    if (!fd->is_mesh()) {
      const auto ho = mean_curvature_oracle(im);
      EXPECT_LT(max_vec_gap(h.vector, ho.vector), 1e-8);
      const auto u = umbilic_test(im, NormalDirection::EtaPerp, intrinsic_fields(im));
      for (std::size_t i = 0; i < im.size(); ++i) {
        EXPECT_NEAR(u.factor[i], 0.0, 1e-12);
        EXPECT_NEAR(u.deviation[i], 0.0, 1e-12);
      }
    }
  }
}

TEST(Extrinsic, ClosedFormMatchesOracleOnLeaves) {
  auto prof = make_profile(1.0);
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    double prev = 0.0;
    for (int rows : {17, 33, 65}) {
      auto fd = band(rows);
      auto im = Immersion::from_leaf_section(prof, fam, 0.3, field(*fd, "4 + 0.3*z + 0.1*x*y"), fd);
      const auto hc = mean_curvature(im);
      const auto ho = mean_curvature_oracle(im);
      const double gap = max_vec_gap(hc.vector, ho.vector);
      if (prev > 0) EXPECT_GT(std::log2(prev / gap), 3.0) << rows;
      prev = gap;
    }
    EXPECT_LT(prev, 1e-5);
  }
}

TEST(Extrinsic, FrameChangeConsistency) {
  auto prof = make_profile(1.0);
  auto fd = band(33);
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    auto im = Immersion::from_leaf_section(prof, fam, 0.0, field(*fd, "5 + 0.4*z + 0.2*x"), fd);
    const auto h = mean_curvature(im);
    const auto re = mean_curvature_from_vectors(im, h.vector);
    for (std::size_t i = 0; i < im.size(); ++i) {
      EXPECT_NEAR((h.null_coeffs[i] - re.null_coeffs[i]).cwiseAbs().maxCoeff(), 0.0, 1e-12);
      EXPECT_NEAR((h.normal_coeffs[i] - re.normal_coeffs[i]).cwiseAbs().maxCoeff(), 0.0, 1e-12);
      EXPECT_NEAR(h.norm2[i], re.norm2[i], 1e-12);
    }
  }
}

TEST(Extrinsic, LeafTraceReduction) {
  // g̃(H, ζ) = -ζλ/λ on ζ-leaves.
  auto prof = make_profile(1.0, Warping::custom("r^2*(1 + 0.05*sin(t))"));
  auto fd = band(33);
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    auto im = Immersion::from_leaf_section(prof, fam, 0.2, field(*fd, "5 + 0.4*z"), fd);
    const auto h = mean_curvature(im);
    const auto ho = mean_curvature_oracle(im);
    const auto factor = generator_shape_factor(im);
    for (std::size_t i = 0; i < im.size(); ++i) {
      const double f2 = prof->eval(im.v()[i]).f2;
      const Vec4 gen = fam == LeafFamily::Xi ? Vec4(1 / f2, 1, 0, 0) : Vec4(0.5, -0.5 * f2, 0, 0);
      const Mat4 G = im.ambient_metric_at(i);
      EXPECT_NEAR(h.vector[i].dot(G * gen), factor[i], 1e-12);
      EXPECT_NEAR(ho.vector[i].dot(G * gen), factor[i], 1e-5);
    }
  }
}

TEST(Extrinsic, ShapeOperators) {
  auto prof = make_profile(1.0);
  double prev = 0.0;
  for (int rows : {17, 33, 65}) {
    auto fd = band(rows);
    auto im = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0, field(*fd, "4 + 0.3*z"), fd);
    const auto fields = intrinsic_fields(im);
    const auto closed = shape_operators_closed(im, fields);
    const auto oracle = shape_operators_oracle(im, second_fundamental_form_oracle(im));
    const auto h = mean_curvature(im, fields);
    const auto frame = frame_decomposition(im);
    for (std::size_t i = 0; i < im.size(); ++i) {
      // λ = r: A_ξ = -(1/v) Id exactly.
      EXPECT_EQ((closed.generator[i] + Mat2::Identity() / im.v()[i]).cwiseAbs().maxCoeff(), 0.0);
      // trace(A_ζ) = m g̃(H, ζ)
      const Mat4 G = im.ambient_metric_at(i);
      EXPECT_NEAR(closed.transverse[i].trace(), 2.0 * h.vector[i].dot(G * frame.eta_perp[i]), 1e-12);
      EXPECT_NEAR(closed.generator[i].trace(), 2.0 * h.vector[i].dot(G * frame.xi_perp[i]), 1e-12);
    }
    const double gap = std::max(max_mat_gap(closed.generator, oracle.generator),
                                max_mat_gap(closed.transverse, oracle.transverse));
    if (prev > 0) EXPECT_GT(std::log2(prev / gap), 2.5);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-5);
  auto mesh_im = Immersion::from_slice(prof, 0, 4, ico(1));
  EXPECT_THROW(shape_operators_closed(mesh_im, intrinsic_fields(mesh_im)), UnsupportedBackend);
  EXPECT_THROW(second_fundamental_form_oracle(mesh_im), UnsupportedBackend);
}

TEST(Extrinsic, EtaShapeOperators) {
  auto prof = make_profile(1.0);
  auto fd = band(65);
  auto im = Immersion::from_leaf_section(prof, LeafFamily::Eta, 0.0, field(*fd, "4 + 0.3*z"), fd);
  const auto closed = shape_operators_closed(im, intrinsic_fields(im));
  const auto oracle = shape_operators_oracle(im, second_fundamental_form_oracle(im));
  EXPECT_LT(max_mat_gap(closed.generator, oracle.generator), 1e-6);
  EXPECT_LT(max_mat_gap(closed.transverse, oracle.transverse), 1e-5);
}

TEST(Extrinsic, MinkowskiCone) {
  auto prof = make_profile(0.0);
  for (auto fd : {ico(3), band(17)}) {
    auto im = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0, ScalarField(fd->size(), 3.0), fd);
    const auto h = mean_curvature(im);
    const auto routes = mean_curvature_norm(im);
    for (std::size_t i = 0; i < im.size(); ++i) {
      EXPECT_NEAR(h.null_coeffs[i](0), -1.0 / 6.0, 1e-12);
      EXPECT_NEAR(h.null_coeffs[i](1), 1.0 / 3.0, 1e-12);
      EXPECT_NEAR(routes.frame[i], 1.0 / 9.0, 1e-12);
    }
    // The curvature route sees discretization error in S only.
    EXPECT_LT(routes.max_gap, fd->is_mesh() ? 1e-12 : 1e-4);
  }
}

TEST(Extrinsic, LightlikeHyperplane) {
  auto prof = make_profile(0.0, Warping::constant_one());
  auto fd = torus(64);
  auto im = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0, field(*fd, "5 + 0.3*sin(a)*cos(b)"), fd);
  const auto fields = intrinsic_fields(im);
  const auto h = mean_curvature(im, fields);
  const auto oracle = mean_curvature_oracle(im);
  EXPECT_LT(max_vec_gap(h.vector, oracle.vector), 1e-6);
  const auto causal = causal_classification(im, h, &fields);
  for (std::size_t i = 0; i < im.size(); ++i) {
    EXPECT_NEAR(h.normal_coeffs[i](0), fields.laplacian[i] / 2.0, 1e-14);
    EXPECT_NEAR(h.normal_coeffs[i](1), 0.0, 1e-14);
    EXPECT_NEAR(h.norm2[i], 0.0, 1e-14);
    if (std::abs(fields.laplacian[i]) > 1e-3) {
      EXPECT_EQ(causal.point_class[i], CausalClass::MarginallyTrapped);
      EXPECT_EQ(causal.orientation[i],
                fields.laplacian[i] > 0 ? TimeOrientation::Future : TimeOrientation::Past);
    }
  }
  EXPECT_EQ(causal.verdict, CausalClass::MarginallyTrapped);
  EXPECT_TRUE(causal.predicate_residual.empty());
}

TEST(Extrinsic, NormRoutesAndPredicate) {
  auto prof = make_profile(1.0);
  double prev = 0.0;
  for (int rows : {33, 65, 129}) {
    auto fd = band(rows);
    auto im = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0, field(*fd, "4 + 0.3*z"), fd);
    const auto routes = mean_curvature_norm(im);
    const auto fields = intrinsic_fields(im);
    const auto h = mean_curvature(im, fields);
    const auto causal = causal_classification(im, h, &fields);
    for (std::size_t i = 0; i < im.size(); ++i) {
      const double v = im.v()[i];
      EXPECT_NEAR(causal.predicate_residual[i], -2.0 * v * v * h.norm2[i], 1e-10);
      EXPECT_GT(h.norm2[i], 0.0);
      EXPECT_EQ(causal.point_class[i], CausalClass::Untrapped);
    }
    if (prev > 0) EXPECT_GT(std::log2(prev / routes.max_gap), 2.0);
    prev = routes.max_gap;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Extrinsic, ParallelMeanCurvature) {
  auto fd = band(65);
  const auto v = field(*fd, "4 + 0.3*z");
  auto radial = make_profile(1.0);
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    auto im = Immersion::from_leaf_section(radial, fam, 0.0, v, fd);
    const auto res = parallel_H_residual(im);
    const auto der = parallel_H_residual_derived(im);
    for (std::size_t i = 0; i < im.size(); ++i) {
      EXPECT_LE(res[i], 1e-12);
      EXPECT_LE(der[i], 1e-6);
    }
  }
  auto square = make_profile(1.0, Warping::custom("r^2"));
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    auto im = Immersion::from_leaf_section(square, fam, 0.0, v, fd);
    const auto res = parallel_H_residual(im);
    const auto der = parallel_H_residual_derived(im);
    double top = 0;
    for (std::size_t i = 0; i < im.size(); ++i) {
      top = std::max(top, res[i]);
      EXPECT_NEAR(res[i], der[i], 1e-6);
    }
    // ξ side: ‖∇v‖·ξ(ξλ)/λ with ξ(ξλ) = 2; η side: ‖∇v‖ f²/λ.
    EXPECT_GT(top, fam == LeafFamily::Xi ? 1e-3 : 1e-4);
  }
}

TEST(Extrinsic, NormalConnectionAgainstOracle) {
  auto prof = make_profile(1.0, Warping::custom("r + 0.05*r^2"));
  auto fd = band(65);
  const auto& grid = fd->grid();
  for (auto fam : {LeafFamily::Xi, LeafFamily::Eta}) {
    auto im = Immersion::from_leaf_section(prof, fam, 0.0, field(*fd, "4 + 0.3*z + 0.1*x"), fd);
    const auto shape = shape_operators_closed(im, intrinsic_fields(im));
    const auto frame = frame_decomposition(im);
    const bool xi_side = fam == LeafFamily::Xi;
    // Normal fields along M, differentiated componentwise on the grid.
    std::array<std::vector<Vec4>, 2> normals;
    for (std::size_t i = 0; i < im.size(); ++i) {
      const double f2 = prof->eval(im.v()[i]).f2;
      normals[0].push_back(xi_side ? Vec4(1 / f2, 1, 0, 0) : Vec4(0.5, -0.5 * f2, 0, 0));
      normals[1].push_back(xi_side ? frame.eta_perp[i] : frame.xi_perp[i]);
    }
    for (int a = 0; a < 2; ++a) {
      const std::vector<Vec2> V(im.size(), Vec2::Unit(a));
      const auto closed = normal_connection(im, V, shape);
      for (int which = 0; which < 2; ++which) {
        std::array<GridDerivatives, 4> d;
        for (int c = 0; c < 4; ++c) {
          ScalarField comp(im.size());
          for (std::size_t i = 0; i < im.size(); ++i) comp[i] = normals[which][i](c);
          d[c] = grid.derivatives(comp);
        }
        double gap = 0;
        for (std::size_t i = 0; i < im.size(); ++i) {
          if (grid.rows_from_edge(i) < 3) continue;
          const Vec2 x = grid.coord(i);
          AmbientPoint p;
          p.chart = FiberChart::SpherePolarZ;
          p.coords = Vec4(im.u()[i], im.v()[i], x(0), x(1));
          const Vec4 e = im.push_forward(i, V[i]);
          const Vec4 dn = a == 0 ? Vec4(d[0].d0[i], d[1].d0[i], d[2].d0[i], d[3].d0[i])
                                 : Vec4(d[0].d1[i], d[1].d1[i], d[2].d1[i], d[3].d1[i]);
          Vec4 w = oracle_covderiv(*prof, p, e, normals[which][i], dn);
          const Mat4 G = im.ambient_metric_at(i);
          const Mat2 ginv = im.metric()[i].inverse();
          const Vec4 e0 = im.push_forward(i, Vec2::Unit(0)), e1 = im.push_forward(i, Vec2::Unit(1));
          const Vec2 c = ginv * Vec2(e0.dot(G * w), e1.dot(G * w));
          w -= c(0) * e0 + c(1) * e1;
          const Vec4 ref = which == 0 ? closed.generator[i] : closed.transverse[i];
          gap = std::max(gap, (w - ref).cwiseAbs().maxCoeff());
        }
        EXPECT_LT(gap, 1e-5) << "family " << int(fam) << " dir " << a << " field " << which;
      }
    }
  }
}

TEST(Extrinsic, UmbilicDeviation) {
  auto prof = make_profile(1.0);
  auto fd = band(65);
  std::vector<double> dev;
  for (double eps : {0.2, 0.1, 0.05}) {
    auto im = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0,
                                           field(*fd, "4 + " + std::to_string(eps) + "*z"), fd);
    const auto u = umbilic_test(im, NormalDirection::EtaPerp, intrinsic_fields(im));
    dev.push_back(*std::max_element(u.deviation.begin(), u.deviation.end()));
  }
  EXPECT_GT(std::log2(dev[0] / dev[1]), 1.7);
  EXPECT_GT(std::log2(dev[1] / dev[2]), 1.7);
  auto generic = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0,
                                              field(*fd, "4 + 0.2*x*y + 0.2*z^2"), fd);
  const auto u = umbilic_test(generic, NormalDirection::EtaPerp, intrinsic_fields(generic));
  EXPECT_GT(*std::max_element(u.deviation.begin(), u.deviation.end()), 1e-2);
  EXPECT_THROW(umbilic_test(generic, NormalDirection::XiPerp, intrinsic_fields(generic)), ConfigError);
}

TEST(Extrinsic, OracleKernelParity) {
  auto prof = make_profile(1.0);
  auto fd = torus(32);
  auto im = Immersion::from_graph(prof, field(*fd, "0.1*sin(a)"), field(*fd, "5 + 0.2*cos(b)"), fd);
  const auto par = second_fundamental_form_oracle(im);
  const auto ser = second_fundamental_form_oracle_serial(im);
  EXPECT_LT(max_vec_gap(par.H, ser.H), 1e-15);
}

TEST(Extrinsic, GraphReport) {
  auto prof = make_profile(1.0);
  auto fd = torus(32);
  auto im = Immersion::from_graph(prof, field(*fd, "0.1*sin(a)"), field(*fd, "5 + 0.2*cos(b)"), fd);
  const auto rep = extrinsic_report(im);
  EXPECT_FALSE(rep.closed_form);
  EXPECT_EQ(rep.H.vector.size(), im.size());
  EXPECT_THROW(mean_curvature(im), ConfigError);
  auto leaf = Immersion::from_leaf_section(prof, LeafFamily::Xi, 0.0, field(*fd, "5 + 0.2*cos(b)"), fd);
  const auto lrep = extrinsic_report(leaf);
  EXPECT_TRUE(lrep.closed_form);
  EXPECT_EQ(lrep.causal.verdict, CausalClass::Untrapped);
  ASSERT_TRUE(lrep.umbilic.has_value());
}

TEST(Kernels, OracleMatchesSerialReference) {
  const auto prof = make_profile(1.0);
  const auto grid = ChartGrid::torus(24, 24);
  ScalarField u(grid.size()), v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = grid.coord(k);
    u[k] = 0.1 * std::sin(x(0));
    v[k] = 5.0 + 0.3 * std::cos(x(1)) + 0.2 * std::sin(x(0) + x(1));
  }
  const auto du = grid.derivatives(u), dv = grid.derivatives(v);
  const auto a = kernels::oracle_second_form(*prof, grid, FiberChart::Flat, u, v, du, dv, OracleOptions{});
  const auto b =
      kernels::reference::oracle_second_form(*prof, grid, FiberChart::Flat, u, v, du, dv, OracleOptions{});
  ASSERT_EQ(a.H.size(), b.H.size());
  for (std::size_t k = 0; k < a.H.size(); ++k) {
    EXPECT_LT((a.H[k] - b.H[k]).norm(), 1e-12 * (1.0 + b.H[k].norm()));
    EXPECT_LT((a.metric[k] - b.metric[k]).norm(), 1e-12);
    for (int j = 0; j < 3; ++j) EXPECT_LT((a.II[k][j] - b.II[k][j]).norm(), 1e-10 * (1.0 + b.II[k][j].norm()));
  }
}
