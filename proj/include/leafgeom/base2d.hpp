#pragma once

#include "leafgeom/expression.hpp"
#include "leafgeom/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leafgeom {

enum class WarpingKind { RadialR, ConstantOne, Custom };

// λ and its partials up to second order at one base point.
struct WarpingJet {
  double value = 1.0;
  double lt = 0.0, lr = 0.0;
  double ltt = 0.0, ltr = 0.0, lrr = 0.0;
};

class Warping {
 public:
  static Warping radial();
  static Warping constant_one();
  // λ(t, r) given as an expression in t and r. Partials are derived symbolically.
  static Warping custom(const std::string& text);

  WarpingKind kind() const { return kind_; }
  WarpingJet jet(double t, double r) const;
  std::string describe() const;

 private:
  WarpingKind kind_ = WarpingKind::RadialR;
  std::string text_;
  Expression l_, lt_, lr_, ltt_, ltr_, lrr_;
};

struct ProfileSpec {
  double mass = 0.0;
  double charge = 0.0;
  double cosmo = 0.0;
  int fiber_dim = 2;
  Warping warping = Warping::radial();
  double scan_lo = 1e-3;
  double scan_hi = 1e4;
  std::optional<int> domain_component;  // index from the inside; default outermost
  std::optional<double> tortoise_ref;   // default: reference inside the component
  double tortoise_value = 0.0;          // r_* at tortoise_ref
};

struct ProfileValues {
  double f2 = 1.0;
  double df2 = 0.0;   // d(f²)/dr
  double ffp = 0.0;   // f f' = df2 / 2
  double d2f2 = 0.0;  // d²(f²)/dr²
};

// Open interval (r_min, r_max) on which f² > 0.
struct DomainInterval {
  double r_min = 0.0;
  double r_max = 0.0;
  bool contains(double r) const { return r > r_min && r < r_max; }
};

// Raw f² family without domain restriction (no throw except r <= 0).
ProfileValues profile_raw(const ProfileSpec& spec, double r);

// All connected components of {f² > 0} inside [scan_lo, scan_hi], inner first.
std::vector<DomainInterval> positive_components(const ProfileSpec& spec);

// Resolved profile: spec plus chosen exterior component and tortoise normalization.
class Profile {
 public:
  explicit Profile(ProfileSpec spec);

  const ProfileSpec& spec() const { return spec_; }
  const DomainInterval& domain() const { return domain_; }
  int fiber_dim() const { return spec_.fiber_dim; }
  double tortoise_ref() const { return r_ref_; }

  // Throws DomainError outside the chosen component.
  void require_domain(double r) const;
  ProfileValues eval(double r) const;
  WarpingJet warping(const BasePoint& p) const;

 private:
  ProfileSpec spec_;
  DomainInterval domain_;
  double r_ref_ = 0.0;
};

ProfileValues profile_eval(const Profile& prof, double r);

// Nonzero Christoffel symbols of g_B = -f² dt² + dr²/f² in (t, r).
struct BaseConnection {
  double r_tt = 0.0;  // Γ^r_tt = f³f'
  double t_tr = 0.0;  // Γ^t_tr = f'/f
  double r_rr = 0.0;  // Γ^r_rr = -f'/f
};
BaseConnection base_connection(const Profile& prof, const BasePoint& p);

struct LightlikeFrame {
  BaseVector xi;
  BaseVector eta;
};
LightlikeFrame lightlike_frame(const Profile& prof, const BasePoint& p);

// α = f'(f dt - dr/f) in (t, r) components.
BaseCovector alpha_form(const Profile& prof, const BasePoint& p);

double gauss_curvature(const Profile& prof, double r);

double base_metric(const Profile& prof, const BasePoint& p, const BaseVector& a,
                   const BaseVector& b);

// r_*(r) = tortoise_value + ∫_{tortoise_ref}^{r} du / f²(u).
double tortoise(const Profile& prof, double r);
// ∫_{r_ref}^{r} du / f²(u).
double tortoise(const Profile& prof, double r, double r_ref);

struct BaseGradients {
  BaseVector t, r, f, lambda;
};
BaseGradients base_gradients(const Profile& prof, const BasePoint& p);

// Derivatives of λ along the lightlike frame, including the second derivatives
// ξ(ξλ) and η(ηλ) that enter the parallel mean curvature residuals.
struct FrameDerivatives {
  double lambda = 1.0;
  double xi = 0.0;      // ξλ
  double eta = 0.0;     // ηλ
  double xi_xi = 0.0;   // ξ(ξλ)
  double eta_eta = 0.0; // η(ηλ)
};
FrameDerivatives warping_frame_derivatives(const Profile& prof, const BasePoint& p);

// ξλ/λ and ηλ/λ.
struct NullWeingarten {
  double xi = 0.0;
  double eta = 0.0;
};
NullWeingarten null_weingarten_factor(const Profile& prof, const BasePoint& p);

}  // namespace leafgeom
