#pragma once

#include "leafgeom/extrinsic.hpp"
#include "leafgeom/immersion.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace leafgeom {

enum class CheckKind { PointwiseIdentity, IntegralIdentity, Inequality, Classification };
std::string to_string(CheckKind k);

struct CheckResult {
  std::string name;
  CheckKind kind = CheckKind::PointwiseIdentity;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> refinement_orders;
  // Named diagnostic values in a fixed order.
  std::vector<std::pair<std::string, double>> values;
  std::string note;

  double value(const std::string& key) const;
};

struct CheckParams {
  double tolerance = 0.0;               // <= 0 selects the check's default
  std::optional<double> curvature_c;    // eigenvalue_hypothesis constant; default λ₁/2
  double factoring_tolerance = 0.0;     // forwarded to factoring_test
};

struct CheckSpec {
  std::string name;
  CheckKind kind;
  double default_tolerance;
  std::string summary;    // one line
  std::string statement;  // the identity or inequality being checked
  bool conclusion_only = false;
};

const std::vector<CheckSpec>& check_catalog();
// Throws UnknownCheck.
const CheckSpec& describe_check(const std::string& name);

CheckResult check_divergence_identity(const Immersion& im, const CheckParams& p = {});
CheckResult check_integral_inequality(const Immersion& im, const CheckParams& p = {});
CheckResult check_scalar_curvature_identity(const Immersion& im, const CheckParams& p = {});
CheckResult check_gauss_bonnet(const Immersion& im, const CheckParams& p = {});
CheckResult check_prop_080723B(const Immersion& im, const CheckParams& p = {});
CheckResult check_minimal_implies_slice(const Immersion& im, const CheckParams& p = {});
CheckResult check_eigenvalue_hypothesis(const Immersion& im, const CheckParams& p = {});
CheckResult check_mean_curvature_oracle(const Immersion& im, const CheckParams& p = {});
CheckResult check_shape_operator(const Immersion& im, const CheckParams& p = {});
CheckResult check_trapped_classification(const Immersion& im, const CheckParams& p = {});
CheckResult check_parallel_mean_curvature(const Immersion& im, const CheckParams& p = {});
CheckResult check_umbilic_slice(const Immersion& im, const CheckParams& p = {});
CheckResult check_base_identities(const Immersion& im, const CheckParams& p = {});

// Dispatch by catalog name. Throws UnknownCheck.
CheckResult run_check(const std::string& name, const Immersion& im, const CheckParams& p = {});

// base + Σ c_k h_k over low-order harmonics (l ≤ 2 spherical harmonics on the
// sphere, first Fourier modes on the torus) with Σ|c_k| = amplitude. Every
// h_k is bounded by 1, so the field stays within amplitude of base.
std::string random_field_expression(std::mt19937_64& rng, SurfaceKind surface, double base,
                                    double amplitude);

// Mesh: mean edge length; grid: column spacing.
double characteristic_spacing(const FiberDiscretization& fd);

// Least-squares slope of log(residual) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& residual);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  CheckResult result;
};

struct ConvergenceTable {
  std::string check;
  std::vector<ConvergenceRow> rows;
  std::vector<double> pairwise_orders;
  double fitted_order = 0.0;
};

using ImmersionFactory = std::function<Immersion(int level)>;

// Runs the check at every level. The finest row's result carries the
// pairwise orders in refinement_orders.
ConvergenceTable convergence_study(const std::string& check, const ImmersionFactory& make,
                                   const std::vector<int>& levels, const CheckParams& p = {});

}  // namespace leafgeom
