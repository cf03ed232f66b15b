#pragma once

#include "leafgeom/immersion.hpp"
#include "leafgeom/warped.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace leafgeom {

// Generator of the leaf a leaf-provenance immersion lies in. Slices are
// treated as ξ-leaves with ∇v = 0.
enum class LeafSide { Xi, Eta };
LeafSide leaf_side(const Immersion& im);

// Derivatives of v in the induced metric g.
struct IntrinsicFields {
  ScalarField laplacian;      // Δv
  ScalarField grad_norm2;     // ‖∇v‖²
  std::vector<Mat2> hessian;  // covariant Hess v in the local basis; empty on meshes
};
// Meshes support only conformal induced metrics (leaves and slices).
IntrinsicFields intrinsic_fields(const Immersion& im);

// Scalar curvature of g_F and of the induced metric g = λ²g_F (leaves, slices).
struct CurvatureFields {
  ScalarField fiber;
  ScalarField induced;
};
CurvatureFields curvature_fields(const Immersion& im);

struct SecondFundamentalForm {
  std::vector<std::array<Vec4, 3>> II;  // II(e0,e0), II(e0,e1), II(e1,e1), ambient components
  std::vector<Vec4> H;
};

// Finite-difference second fundamental form on a chart grid: chart derivatives
// of the embedding plus Christoffels from differences of the ambient metric,
// projected onto the normal bundle. Works for every provenance.
SecondFundamentalForm second_fundamental_form_oracle(const Immersion& im,
                                                     const OracleOptions& opt = {});
SecondFundamentalForm second_fundamental_form_oracle_serial(const Immersion& im,
                                                            const OracleOptions& opt = {});

struct MeanCurvature {
  std::vector<Vec2> normal_coeffs;  // H = a ξ^⊥ + b η^⊥
  std::vector<Vec2> null_coeffs;    // leaves: H = a ζ + b ℓ, ζ the generator; zero for graphs
  std::vector<Vec4> vector;         // ambient components in (∂t, ∂r, e1, e2)
  ScalarField norm2;                // g̃(H, H), signed
};

// Closed form on leaves and slices.
MeanCurvature mean_curvature(const Immersion& im, const IntrinsicFields& fields);
MeanCurvature mean_curvature(const Immersion& im);
// Decompose given normal vectors (for example the oracle H) in the frames above.
MeanCurvature mean_curvature_from_vectors(const Immersion& im, std::vector<Vec4> h);
MeanCurvature mean_curvature_oracle(const Immersion& im, const OracleOptions& opt = {});

// ‖H‖² from the null frame and from the scalar curvature of g (λ = r, m = 2).
struct NormRoutes {
  ScalarField frame;
  ScalarField curvature;
  double max_gap = 0.0;
};
NormRoutes mean_curvature_norm(const Immersion& im);

struct ShapeOperators {
  LeafSide side = LeafSide::Xi;
  std::vector<Mat2> generator;   // A_ξ or A_η
  std::vector<Mat2> transverse;  // A_{η^⊥} or A_{ξ^⊥}
};
// -(ξλ/λ) on ξ-leaves, -(ηλ/λ) on η-leaves; the generator shape operator is
// this factor times the identity. Available on every backend.
ScalarField generator_shape_factor(const Immersion& im);
// Needs the Hessian of v: UnsupportedBackend on meshes.
ShapeOperators shape_operators_closed(const Immersion& im, const IntrinsicFields& fields);
ShapeOperators shape_operators_oracle(const Immersion& im, const SecondFundamentalForm& sff);

enum class NormalDirection { EtaPerp, XiPerp };
struct UmbilicReport {
  ScalarField factor;     // h = tr(Hess v) / m
  ScalarField deviation;  // operator norm of the traceless part
};
UmbilicReport umbilic_test(const Immersion& im, NormalDirection dir, const IntrinsicFields& fields);

// ∇^⊥_V of the generator and of the transverse normal along per-point tangent
// vectors V (local basis). The II(∇v, V) term comes from the shape operators.
struct NormalConnection {
  std::vector<Vec4> generator;
  std::vector<Vec4> transverse;
};
NormalConnection normal_connection(const Immersion& im, const std::vector<Vec2>& V,
                                   const ShapeOperators& shape);

// sup over g-unit V of |g̃(∇^⊥_V H, ζ)| with ζ the generator.
ScalarField parallel_H_residual(const Immersion& im);
// Same quantity from V(g̃(H, ζ)) - g̃(H, ∇^⊥_V ζ), differentiating g̃(H, ζ)
// numerically on the fiber.
ScalarField parallel_H_residual_derived(const Immersion& im);

enum class CausalClass { Minimal, Untrapped, MarginallyTrapped, WeaklyTrapped, Trapped, Mixed };
enum class TimeOrientation { None, Future, Past };
std::string to_string(CausalClass c);
std::string to_string(TimeOrientation o);

struct CausalReport {
  std::vector<CausalClass> point_class;     // Minimal, Untrapped, MarginallyTrapped or Trapped
  std::vector<TimeOrientation> orientation;
  double band = 0.0;                        // |‖H‖²| ≤ band counts as lightlike
  CausalClass verdict = CausalClass::Mixed;
  TimeOrientation verdict_orientation = TimeOrientation::None;
  // 2vΔv - m(f² + ‖∇v‖²) for λ = r leaves; empty otherwise.
  ScalarField predicate_residual;
};
// ∂t is future. The marginal band is rel_band times the largest squared
// Euclidean size of H measured against the unit timelike ∂t/f.
CausalReport causal_classification(const Immersion& im, const MeanCurvature& h,
                                   const IntrinsicFields* fields = nullptr,
                                   double rel_band = 1e-6);

struct ExtrinsicReport {
  Provenance provenance = Provenance::Graph;
  bool closed_form = false;  // H from closed forms (leaves) or the oracle (graphs)
  MeanCurvature H;
  std::vector<Vec2> shape_spectrum;  // eigenvalues of the transverse shape operator (grids)
  CausalReport causal;
  std::optional<UmbilicReport> umbilic;
  ScalarField parallel_residual;
};
ExtrinsicReport extrinsic_report(const Immersion& im);

}  // namespace leafgeom
