#include "leafgeom/kernels.hpp"

namespace leafgeom::kernels {

namespace {

// Fourth-order weights, scaled by 12 h (first) or 12 h² (second).
constexpr double kD1Edge0[5] = {-25, 48, -36, 16, -3};
constexpr double kD1Edge1[5] = {-3, -10, 18, -6, 1};
constexpr double kD2Edge0[6] = {45, -154, 214, -156, 61, -10};
constexpr double kD2Edge1[6] = {10, -15, -4, 14, -6, 1};

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

// Derivatives along the periodic column direction at (i, j).
inline void col_diff(const ChartGrid& g, std::span<const double> s, int i, int j, double& d,
                     double& dd) {
  const int n = g.cols();
  const double sm2 = s[g.index(i, wrap(j - 2, n))], sm1 = s[g.index(i, wrap(j - 1, n))];
  const double s0 = s[g.index(i, j)];
  const double sp1 = s[g.index(i, wrap(j + 1, n))], sp2 = s[g.index(i, wrap(j + 2, n))];
  const double h = g.h1();
  d = (sm2 - 8.0 * sm1 + 8.0 * sp1 - sp2) / (12.0 * h);
  dd = (-sm2 + 16.0 * sm1 - 30.0 * s0 + 16.0 * sp1 - sp2) / (12.0 * h * h);
}

// Derivatives along the row direction at (i, j); one-sided near non-periodic edges.
inline void row_diff(const ChartGrid& g, std::span<const double> s, int i, int j, double& d,
                     double& dd) {
  const int n = g.rows();
  const double h = g.h0();
  auto at = [&](int k) { return s[g.index(k, j)]; };
  if (g.periodic_rows() || (i >= 2 && i <= n - 3)) {
    auto w = [&](int k) { return g.periodic_rows() ? at(wrap(k, n)) : at(k); };
    const double sm2 = w(i - 2), sm1 = w(i - 1), s0 = w(i), sp1 = w(i + 1), sp2 = w(i + 2);
    d = (sm2 - 8.0 * sm1 + 8.0 * sp1 - sp2) / (12.0 * h);
    dd = (-sm2 + 16.0 * sm1 - 30.0 * s0 + 16.0 * sp1 - sp2) / (12.0 * h * h);
    return;
  }
  // Mirror the far edge onto the near-edge stencils.
  const bool low = i < 2;
  const int off = low ? i : n - 1 - i;
  const int dir = low ? 1 : -1;
  const int base = low ? 0 : n - 1;
  const double* w1 = off == 0 ? kD1Edge0 : kD1Edge1;
  const double* w2 = off == 0 ? kD2Edge0 : kD2Edge1;
  d = 0.0;
  dd = 0.0;
  for (int k = 0; k < 5; ++k) d += w1[k] * at(base + dir * k);
  for (int k = 0; k < 6; ++k) dd += w2[k] * at(base + dir * k);
  d *= dir / (12.0 * h);
  dd /= 12.0 * h * h;
}

GridDerivatives allocate(const ChartGrid& g) {
  GridDerivatives out;
  for (auto* f : {&out.d0, &out.d1, &out.d00, &out.d01, &out.d11}) f->assign(g.size(), 0.0);
  return out;
}

}  // namespace

GridDerivatives grid_derivatives(const ChartGrid& g, std::span<const double> s) {
  auto out = allocate(g);
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  const int cols = g.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int i = static_cast<int>(k / cols), j = static_cast<int>(k % cols);
    const auto u = static_cast<std::size_t>(k);
    col_diff(g, s, i, j, out.d1[u], out.d11[u]);
    row_diff(g, s, i, j, out.d0[u], out.d00[u]);
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int i = static_cast<int>(k / cols), j = static_cast<int>(k % cols);
    double unused = 0.0;
    row_diff(g, out.d1, i, j, out.d01[static_cast<std::size_t>(k)], unused);
  }
  return out;
}

namespace reference {

GridDerivatives grid_derivatives(const ChartGrid& g, std::span<const double> s) {
  auto out = allocate(g);
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      const auto u = g.index(i, j);
      col_diff(g, s, i, j, out.d1[u], out.d11[u]);
      row_diff(g, s, i, j, out.d0[u], out.d00[u]);
    }
  }
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) {
      double unused = 0.0;
      row_diff(g, out.d1, i, j, out.d01[g.index(i, j)], unused);
    }
  }
  return out;
}

}  // namespace reference

}  // namespace leafgeom::kernels
