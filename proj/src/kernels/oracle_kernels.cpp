#include "leafgeom/kernels.hpp"

#include <exception>

namespace leafgeom::kernels {

namespace {

void second_form_at(const Profile& prof, const ChartGrid& grid, FiberChart chart,
                    std::span<const double> u, std::span<const double> v,
                    const GridDerivatives& du, const GridDerivatives& dv,
                    const OracleOptions& opt, std::size_t k, SecondFormField& out) {
  const Vec2 x = grid.coord(k);
  AmbientPoint p;
  p.chart = chart;
  p.coords = Vec4(u[k], v[k], x(0), x(1));
  const Christoffel gam = oracle_christoffel(prof, p, opt);
  const Mat4 G = ambient_metric(prof, p);

  const std::array<Vec4, 2> e{Vec4(du.d0[k], dv.d0[k], 1.0, 0.0),
                              Vec4(du.d1[k], dv.d1[k], 0.0, 1.0)};
  Mat2 g;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g(a, b) = e[a].dot(G * e[b]);
  const Mat2 ginv = g.inverse();

  const std::array<Vec4, 3> second{Vec4(du.d00[k], dv.d00[k], 0.0, 0.0),
                                   Vec4(du.d01[k], dv.d01[k], 0.0, 0.0),
                                   Vec4(du.d11[k], dv.d11[k], 0.0, 0.0)};
  const int ia[3] = {0, 0, 1}, ib[3] = {0, 1, 1};
  for (int s = 0; s < 3; ++s) {
    Vec4 w = second[s] + gam.contract(e[ia[s]], e[ib[s]]);
    const Vec2 proj(e[0].dot(G * w), e[1].dot(G * w));
    const Vec2 c = ginv * proj;
    out.II[k][s] = w - c(0) * e[0] - c(1) * e[1];
  }
  out.H[k] = 0.5 * (ginv(0, 0) * out.II[k][0] + 2.0 * ginv(0, 1) * out.II[k][1] +
                    ginv(1, 1) * out.II[k][2]);
  out.metric[k] = g;
}

SecondFormField allocate(std::size_t n) {
  SecondFormField out;
  out.II.resize(n);
  out.H.resize(n);
  out.metric.resize(n);
  return out;
}

}  // namespace

SecondFormField oracle_second_form(const Profile& prof, const ChartGrid& grid, FiberChart chart,
                                   std::span<const double> u, std::span<const double> v,
                                   const GridDerivatives& du, const GridDerivatives& dv,
                                   const OracleOptions& opt) {
  auto out = allocate(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      second_form_at(prof, grid, chart, u, v, du, dv, opt, static_cast<std::size_t>(k), out);
    } catch (...) {
#pragma omp critical(leafgeom_oracle_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

namespace reference {

SecondFormField oracle_second_form(const Profile& prof, const ChartGrid& grid, FiberChart chart,
                                   std::span<const double> u, std::span<const double> v,
                                   const GridDerivatives& du, const GridDerivatives& dv,
                                   const OracleOptions& opt) {
  auto out = allocate(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    second_form_at(prof, grid, chart, u, v, du, dv, opt, k, out);
  return out;
}

}  // namespace reference

}  // namespace leafgeom::kernels
