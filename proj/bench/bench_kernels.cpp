// OpenMP kernels against their serial references.

#include "leafgeom/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace leafgeom;

namespace {

ScalarField mesh_field(const TriMesh& mesh) {
  ScalarField s(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const Vec3& p = mesh.positions()[i];
    s[i] = 4.0 + 0.3 * p(2) + 0.1 * p(0) * p(1);
  }
  return s;
}

ScalarField grid_field(const ChartGrid& grid, double base, double amp) {
  ScalarField s(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = grid.coord(k);
    s[k] = base + amp * std::cos(x(0)) + 0.5 * amp * std::sin(x(1));
  }
  return s;
}

const TriMesh& mesh_at(int level) {
  static const TriMesh meshes[] = {TriMesh::icosphere(4), TriMesh::icosphere(5), TriMesh::icosphere(6)};
  return meshes[level - 4];
}

template <class Fn>
void run_stiffness(benchmark::State& state, Fn fn) {
  const auto& mesh = mesh_at(static_cast<int>(state.range(0)));
  const auto s = mesh_field(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(fn(mesh, s));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mesh.size()));
}

void BM_StiffnessOmp(benchmark::State& st) { run_stiffness(st, kernels::stiffness_apply); }
void BM_StiffnessSerial(benchmark::State& st) { run_stiffness(st, kernels::reference::stiffness_apply); }

void BM_GradientsOmp(benchmark::State& st) { run_stiffness(st, kernels::vertex_gradients); }
void BM_GradientsSerial(benchmark::State& st) { run_stiffness(st, kernels::reference::vertex_gradients); }

template <class Fn>
void run_grid(benchmark::State& state, Fn fn) {
  const int n = static_cast<int>(state.range(0));
  const auto grid = ChartGrid::torus(n, n);
  const auto s = grid_field(grid, 5.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(fn(grid, s));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void BM_GridDerivativesOmp(benchmark::State& st) { run_grid(st, kernels::grid_derivatives); }
void BM_GridDerivativesSerial(benchmark::State& st) { run_grid(st, kernels::reference::grid_derivatives); }

template <class Fn>
void run_oracle(benchmark::State& state, Fn fn) {
  ProfileSpec spec;
  spec.mass = 1.0;
  const Profile prof(spec);
  const int n = static_cast<int>(state.range(0));
  const auto grid = ChartGrid::torus(n, n);
  const auto u = grid_field(grid, 0.0, 0.2), v = grid_field(grid, 5.0, 0.3);
  const auto du = grid.derivatives(u), dv = grid.derivatives(v);
  for (auto _ : state) benchmark::DoNotOptimize(fn(prof, grid, FiberChart::Flat, u, v, du, dv, OracleOptions{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void BM_OracleSecondFormOmp(benchmark::State& st) { run_oracle(st, kernels::oracle_second_form); }
void BM_OracleSecondFormSerial(benchmark::State& st) {
  run_oracle(st, kernels::reference::oracle_second_form);
}

}  // namespace

BENCHMARK(BM_StiffnessOmp)->DenseRange(4, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StiffnessSerial)->DenseRange(4, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientsOmp)->DenseRange(4, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientsSerial)->DenseRange(4, 6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GridDerivativesOmp)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GridDerivativesSerial)->RangeMultiplier(2)->Range(64, 256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_OracleSecondFormOmp)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleSecondFormSerial)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
