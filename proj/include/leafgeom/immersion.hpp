#pragma once

#include "leafgeom/base2d.hpp"
#include "leafgeom/expression.hpp"
#include "leafgeom/fiber.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace leafgeom {

enum class Provenance { LeafXi, LeafEta, Slice, Graph };
enum class LeafFamily { Xi, Eta };

std::string to_string(Provenance p);

// Evaluate an expression in the fiber variables at every sample point.
ScalarField sample_field(const FiberDiscretization& fd, const Expression& e);

// Per-point tangent/normal split of the lightlike frame. Tangent vectors are
// components in the local fiber basis; ambient vectors are components in
// (∂t, ∂r, e1, e2) with e1, e2 the local fiber basis.
struct FrameField {
  std::vector<Vec2> xi_tan, eta_tan;
  std::vector<Vec4> xi_perp, eta_perp;
  std::vector<Vec4> ell;          // lightlike normal paired with the leaf generator (slices count as ξ-leaves); zero for graphs
  ScalarField tan_inner;          // g(ξ^⊤, η^⊤)
  ScalarField xi_tan_norm2;       // g(ξ^⊤, ξ^⊤)
};

// Spacelike immersion of the fiber, Ψ = ((u, v), id).
class Immersion {
 public:
  static Immersion from_leaf_section(std::shared_ptr<const Profile> prof, LeafFamily family,
                                     double c, ScalarField v,
                                     std::shared_ptr<const FiberDiscretization> fd);
  static Immersion from_slice(std::shared_ptr<const Profile> prof, double t0, double r0,
                              std::shared_ptr<const FiberDiscretization> fd);
  static Immersion from_graph(std::shared_ptr<const Profile> prof, ScalarField u, ScalarField v,
                              std::shared_ptr<const FiberDiscretization> fd);

  const Profile& profile() const { return *prof_; }
  const FiberDiscretization& fiber() const { return *fd_; }
  std::shared_ptr<const Profile> profile_ptr() const { return prof_; }
  std::shared_ptr<const FiberDiscretization> fiber_ptr() const { return fd_; }
  Provenance provenance() const { return provenance_; }
  bool is_leaf() const;
  double constant() const { return c_; }  // leaf constant c or slice t0
  std::size_t size() const { return u_.size(); }

  const ScalarField& u() const { return u_; }
  const ScalarField& v() const { return v_; }
  // λ at each point.
  const ScalarField& lambda() const { return lambda_; }
  // Differentials of u, v in the local fiber basis.
  const std::vector<Vec2>& du() const { return du_; }
  const std::vector<Vec2>& dv() const { return dv_; }
  // Induced metric in the local fiber basis.
  const std::vector<Mat2>& metric() const { return metric_; }
  BasePoint base_point(std::size_t i) const { return {u_[i], v_[i]}; }

  // Ambient metric at point i in the (∂t, ∂r, e1, e2) frame.
  Mat4 ambient_metric_at(std::size_t i) const;
  // dΨ(X) for a tangent vector with components x in the local basis.
  Vec4 push_forward(std::size_t i, const Vec2& x) const;

 private:
  Immersion() = default;
  void finish();

  std::shared_ptr<const Profile> prof_;
  std::shared_ptr<const FiberDiscretization> fd_;
  Provenance provenance_ = Provenance::Graph;
  double c_ = 0.0;
  ScalarField u_, v_, lambda_;
  std::vector<Vec2> du_, dv_;
  std::vector<Mat2> metric_;
};

FrameField frame_decomposition(const Immersion& im);

// Frame decomposition from the general formulas for the tangent parts,
// ignoring provenance.
FrameField frame_decomposition_generic(const Immersion& im);

struct FactoringResult {
  Provenance kind = Provenance::Graph;  // Graph means neither leaf nor slice
  double tolerance = 0.0;
  double residual_xi = 0.0;   // max ‖dv - f² du‖
  double residual_eta = 0.0;  // max ‖dv + f² du‖
  ScalarField pointwise_xi, pointwise_eta;
};

// Relative max error of the fiber gradient on a smooth reference function.
double measured_gradient_error(const FiberDiscretization& fd);

// Classify by the leaf gradient relations. tol <= 0 selects the default:
// ten times the measured gradient error times the size of the differentials.
FactoringResult factoring_test(const Immersion& im, double tol = 0.0);

// ∫_M s dμ_g over a closed discretization (mesh or periodic chart grid).
double integrate(const Immersion& im, std::span<const double> s);

struct LocalDiffeoReport {
  ScalarField jacobian_bound;  // λ(Ψ_B)² per point
  double min_bound = 0.0;
};
LocalDiffeoReport local_diffeo_check(const Immersion& im);

// max over mesh edges of |g̃(TΨ·E, ξ)| / |E| (or along grid lines on a chart grid).
double leaf_tangency_witness(const Immersion& im);

}  // namespace leafgeom
