#include "leafgeom/kernels.hpp"

namespace leafgeom::kernels {

Vec3 triangle_gradient(const TriMesh& mesh, std::size_t t, std::span<const double> s) {
  const auto& tri = mesh.triangles()[t];
  const auto& c = mesh.corners(t);
  const Vec3 n = (c[1] - c[0]).cross(c[2] - c[0]);
  const double twice_area2 = n.squaredNorm();
  Vec3 g = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    const Vec3 edge = c[(k + 2) % 3] - c[(k + 1) % 3];
    g += s[static_cast<std::size_t>(tri[k])] * n.cross(edge);
  }
  return g / twice_area2;
}

namespace {

Vec2 to_basis(const TriMesh& mesh, std::size_t i, const Vec3& g) {
  const auto& b = mesh.tangent_basis(i);
  return {b[0].dot(g), b[1].dot(g)};
}

}  // namespace

ScalarField stiffness_apply(const TriMesh& mesh, std::span<const double> s) {
  const auto& K = mesh.stiffness();
  const auto n = static_cast<std::ptrdiff_t>(K.rows());
  ScalarField y(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (SparseRowMatrix::InnerIterator it(K, i); it; ++it) {
      acc += it.value() * s[static_cast<std::size_t>(it.col())];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::vector<Vec2> vertex_gradients(const TriMesh& mesh, std::span<const double> s) {
  const auto& area = mesh.triangle_areas();
  const auto nt = static_cast<std::ptrdiff_t>(mesh.triangles().size());
  std::vector<Vec3> tri_grad(static_cast<std::size_t>(nt));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    tri_grad[tt] = area[tt] * triangle_gradient(mesh, tt, s);
  }
  const auto n = static_cast<std::ptrdiff_t>(mesh.size());
  std::vector<Vec2> out(static_cast<std::size_t>(n));
  const auto& inc = mesh.vertex_triangles();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Vec3 g = Vec3::Zero();
    double w = 0.0;
    for (const auto& [t, corner] : inc[static_cast<std::size_t>(i)]) {
      (void)corner;
      g += tri_grad[static_cast<std::size_t>(t)];
      w += area[static_cast<std::size_t>(t)];
    }
    out[static_cast<std::size_t>(i)] = to_basis(mesh, static_cast<std::size_t>(i), g / w);
  }
  return out;
}

namespace reference {

ScalarField stiffness_apply(const TriMesh& mesh, std::span<const double> s) {
  ScalarField y(mesh.size(), 0.0);
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const auto& cot = mesh.cotangents(t);
    for (int k = 0; k < 3; ++k) {
      // Edge opposite corner k joins a and b.
      const auto a = static_cast<std::size_t>(tri[(k + 1) % 3]);
      const auto b = static_cast<std::size_t>(tri[(k + 2) % 3]);
      const double w = 0.5 * cot[k];
      const double d = s[a] - s[b];
      y[a] += w * d;
      y[b] -= w * d;
    }
  }
  return y;
}

std::vector<Vec2> vertex_gradients(const TriMesh& mesh, std::span<const double> s) {
  std::vector<Vec3> acc(mesh.size(), Vec3::Zero());
  std::vector<double> w(mesh.size(), 0.0);
  const auto& tris = mesh.triangles();
  const auto& area = mesh.triangle_areas();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const Vec3 g = area[t] * triangle_gradient(mesh, t, s);
    for (int k = 0; k < 3; ++k) {
      const auto i = static_cast<std::size_t>(tris[t][k]);
      acc[i] += g;
      w[i] += area[t];
    }
  }
  std::vector<Vec2> out(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) out[i] = to_basis(mesh, i, acc[i] / w[i]);
  return out;
}

}  // namespace reference

}  // namespace leafgeom::kernels
