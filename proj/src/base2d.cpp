#include "leafgeom/base2d.hpp"

#include "leafgeom/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <sstream>

namespace leafgeom {

Warping Warping::radial() {
  Warping w;
  w.kind_ = WarpingKind::RadialR;
  return w;
}

Warping Warping::constant_one() {
  Warping w;
  w.kind_ = WarpingKind::ConstantOne;
  return w;
}

Warping Warping::custom(const std::string& text) {
  Warping w;
  w.kind_ = WarpingKind::Custom;
  w.text_ = text;
  w.l_ = Expression::parse(text, {"t", "r"});
  w.lt_ = w.l_.derivative("t");
  w.lr_ = w.l_.derivative("r");
  w.ltt_ = w.lt_.derivative("t");
  w.ltr_ = w.lt_.derivative("r");
  w.lrr_ = w.lr_.derivative("r");
  return w;
}

WarpingJet Warping::jet(double t, double r) const {
  WarpingJet j;
  switch (kind_) {
    case WarpingKind::RadialR:
      j.value = r;
      j.lr = 1.0;
      break;
    case WarpingKind::ConstantOne:
      break;
    case WarpingKind::Custom: {
      const std::array<double, 2> x{t, r};
      j.value = l_(x);
      j.lt = lt_(x);
      j.lr = lr_(x);
      j.ltt = ltt_(x);
      j.ltr = ltr_(x);
      j.lrr = lrr_(x);
      break;
    }
  }
  return j;
}

std::string Warping::describe() const {
  switch (kind_) {
    case WarpingKind::RadialR: return "r";
    case WarpingKind::ConstantOne: return "1";
    case WarpingKind::Custom: return text_;
  }
  return "?";
}

namespace {

// r^-k for a nonnegative integer k.
double inv_pow(double r, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= r;
  return 1.0 / p;
}

}  // namespace

ProfileValues profile_raw(const ProfileSpec& spec, double r) {
  if (!(r > 0.0)) throw DomainError("radial coordinate must be positive");
  const int n = spec.fiber_dim;
  const double m = n;
  ProfileValues p;
  p.f2 = 1.0;
  if (spec.mass != 0.0) {
    const double a = 2.0 * spec.mass;
    const double s = inv_pow(r, n - 1);
    p.f2 -= a * s;
    p.df2 += a * (m - 1.0) * s / r;
    p.d2f2 -= a * (m - 1.0) * m * s / (r * r);
  }
  if (spec.charge != 0.0) {
    const double q2 = spec.charge * spec.charge;
    const double s = inv_pow(r, 2 * n - 2);
    p.f2 += q2 * s;
    p.df2 -= q2 * (2.0 * m - 2.0) * s / r;
    p.d2f2 += q2 * (2.0 * m - 2.0) * (2.0 * m - 1.0) * s / (r * r);
  }
  if (spec.cosmo != 0.0) {
    const double c = 2.0 * spec.cosmo / (m * (m + 1.0));
    p.f2 -= c * r * r;
    p.df2 -= 2.0 * c * r;
    p.d2f2 -= 2.0 * c;
  }
  p.ffp = 0.5 * p.df2;
  return p;
}

namespace {

double bisect_sign_change(const ProfileSpec& spec, double lo, double hi) {
  // f² changes sign on [lo, hi]; return the root.
  const bool lo_pos = profile_raw(spec, lo).f2 > 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((profile_raw(spec, mid).f2 > 0.0) == lo_pos) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<DomainInterval> positive_components(const ProfileSpec& spec) {
  if (!(spec.scan_lo > 0.0) || !(spec.scan_hi > spec.scan_lo)) {
    throw ConfigError("domain_scan must satisfy 0 < r_lo < r_hi");
  }
  constexpr int kSamples = 4000;
  const double ratio = std::pow(spec.scan_hi / spec.scan_lo, 1.0 / (kSamples - 1));
  std::vector<DomainInterval> out;
  double prev_r = spec.scan_lo;
  bool prev_pos = profile_raw(spec, prev_r).f2 > 0.0;
  double start = prev_pos ? spec.scan_lo : 0.0;
  for (int i = 1; i < kSamples; ++i) {
    const double r = i == kSamples - 1 ? spec.scan_hi : spec.scan_lo * std::pow(ratio, i);
    const bool pos = profile_raw(spec, r).f2 > 0.0;
    if (pos != prev_pos) {
      const double root = bisect_sign_change(spec, prev_r, r);
      if (pos) start = root;
      else out.push_back({start, root});
    }
    prev_r = r;
    prev_pos = pos;
  }
  if (prev_pos) out.push_back({start, spec.scan_hi});
  return out;
}

Profile::Profile(ProfileSpec spec) : spec_(std::move(spec)) {
  if (spec_.fiber_dim < 2) throw ConfigError("fiber_dim must be at least 2");
  if (spec_.mass < 0.0) throw ConfigError("mass must be nonnegative");
  const auto comps = positive_components(spec_);
  if (comps.empty()) throw DomainError("f^2 has no positive region inside domain_scan");
  if (spec_.domain_component) {
    const int k = *spec_.domain_component;
    if (k < 0 || k >= static_cast<int>(comps.size())) {
      std::ostringstream os;
      os << "domain_component " << k << " out of range (" << comps.size() << " components)";
      throw ConfigError(os.str());
    }
    domain_ = comps[static_cast<std::size_t>(k)];
  } else {
    domain_ = comps.back();
  }
  r_ref_ = spec_.tortoise_ref.value_or(0.5 * (domain_.r_min + domain_.r_max));
  require_domain(r_ref_);
}

void Profile::require_domain(double r) const {
  if (!(r >= domain_.r_min && r <= domain_.r_max) || !(r > 0.0) || profile_raw(spec_, r).f2 <= 0.0) {
    std::ostringstream os;
    os << "r = " << r << " outside the exterior domain (" << domain_.r_min << ", "
       << domain_.r_max << ")";
    throw DomainError(os.str());
  }
}

ProfileValues Profile::eval(double r) const {
  require_domain(r);
  return profile_raw(spec_, r);
}

WarpingJet Profile::warping(const BasePoint& p) const {
  WarpingJet j = spec_.warping.jet(p.t, p.r);
  if (!(j.value > 0.0)) {
    std::ostringstream os;
    os << "warping function not positive at (t, r) = (" << p.t << ", " << p.r << ")";
    throw DomainError(os.str());
  }
  return j;
}

ProfileValues profile_eval(const Profile& prof, double r) { return prof.eval(r); }

BaseConnection base_connection(const Profile& prof, const BasePoint& p) {
  const auto v = prof.eval(p.r);
  return {v.f2 * v.ffp, v.ffp / v.f2, -v.ffp / v.f2};
}

LightlikeFrame lightlike_frame(const Profile& prof, const BasePoint& p) {
  const double f2 = prof.eval(p.r).f2;
  return {{1.0 / f2, 1.0}, {0.5, -0.5 * f2}};
}

BaseCovector alpha_form(const Profile& prof, const BasePoint& p) {
  const auto v = prof.eval(p.r);
  return {v.ffp, -v.ffp / v.f2};
}

double gauss_curvature(const Profile& prof, double r) { return -0.5 * prof.eval(r).d2f2; }

double base_metric(const Profile& prof, const BasePoint& p, const BaseVector& a,
                   const BaseVector& b) {
  const double f2 = prof.eval(p.r).f2;
  return -f2 * a.a_t * b.a_t + a.a_r * b.a_r / f2;
}

double tortoise(const Profile& prof, double r, double r_ref) {
  prof.require_domain(r);
  prof.require_domain(r_ref);
  if (r == r_ref) return 0.0;
  const auto& spec = prof.spec();
  // Boost's error estimate has an absolute floor, so short intervals are
  // mapped to [0, 1] to keep the integral O(1/f²). Long ones integrate
  // directly over the ordered interval.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr double kTol = 1e-12;
  double err = 0.0;
  const double len = r - r_ref;
  if (std::abs(len) < 1.0) {
    auto mapped = [&](double s) { return 1.0 / profile_raw(spec, r_ref + s * len).f2; };
    return len * GK::integrate(mapped, 0.0, 1.0, 15, kTol, &err);
  }
  auto integrand = [&](double u) { return 1.0 / profile_raw(spec, u).f2; };
  const double val = GK::integrate(integrand, std::min(r, r_ref), std::max(r, r_ref), 15, kTol, &err);
  return len > 0.0 ? val : -val;
}

double tortoise(const Profile& prof, double r) {
  return prof.spec().tortoise_value + tortoise(prof, r, prof.tortoise_ref());
}

BaseGradients base_gradients(const Profile& prof, const BasePoint& p) {
  const auto v = prof.eval(p.r);
  const auto j = prof.warping(p);
  const double f = std::sqrt(v.f2);
  BaseGradients g;
  g.t = {-1.0 / v.f2, 0.0};
  g.r = {0.0, v.f2};
  g.f = {0.0, f * v.ffp};
  g.lambda = {-j.lt / v.f2, v.f2 * j.lr};
  return g;
}

FrameDerivatives warping_frame_derivatives(const Profile& prof, const BasePoint& p) {
  const auto v = prof.eval(p.r);
  const auto j = prof.warping(p);
  const double f2 = v.f2;
  FrameDerivatives d;
  d.lambda = j.value;
  d.xi = j.lt / f2 + j.lr;
  d.eta = 0.5 * (j.lt - f2 * j.lr);
  d.xi_xi = j.ltt / (f2 * f2) + 2.0 * j.ltr / f2 - j.lt * v.df2 / (f2 * f2) + j.lrr;
  d.eta_eta = 0.25 * (j.ltt - 2.0 * f2 * j.ltr + f2 * v.df2 * j.lr + f2 * f2 * j.lrr);
  return d;
}

NullWeingarten null_weingarten_factor(const Profile& prof, const BasePoint& p) {
  const auto d = warping_frame_derivatives(prof, p);
  return {d.xi / d.lambda, d.eta / d.lambda};
}

}  // namespace leafgeom
