#include <benchmark/benchmark.h>

#include "bctopt/control.hpp"
#include "bctopt/fem.hpp"
#include "bctopt/levelset.hpp"
#include "bctopt/mesh.hpp"
#include "bctopt/topo.hpp"

namespace {

using namespace bctopt;

const Mesh& cached_mesh(int n) {
  static std::map<int, Mesh> meshes;
  auto it = meshes.find(n);
  if (it == meshes.end())
    it = meshes.emplace(n, generate_ellipsoid_mesh(1.0, 0.5, 1.0, n)).first;
  return it->second;
}

void bm_generate_mesh(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Mesh mesh = generate_ellipsoid_mesh(1.0, 0.5, 1.0, n);
    benchmark::DoNotOptimize(mesh.tets.data());
  }
}
BENCHMARK(bm_generate_mesh)->Arg(6)->Arg(10)->Arg(14);

void bm_assemble_stiffness(benchmark::State& state) {
  const Mesh& mesh = cached_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SparseOperator k = assemble_stiffness(mesh);
    benchmark::DoNotOptimize(k.nonzero_count());
  }
}
BENCHMARK(bm_assemble_stiffness)->Arg(6)->Arg(10)->Arg(14);

void bm_state_solve(benchmark::State& state) {
  const Mesh& mesh = cached_mesh(static_cast<int>(state.range(0)));
  const ControlProblem problem(mesh, 1.0, 0.0);
  const SectorGeometry geometry = make_sector_geometry(3);
  const BoundaryPartition partition = partition_from_levelset(geometry,
                                                              init_levelset(geometry, mesh));
  const std::vector<double> alpha = {0.1, 10.0, 3.0};
  for (auto _ : state) {
    NodalField u = problem.solve_state(partition, alpha);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(bm_state_solve)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void bm_topo_fields(benchmark::State& state) {
  const Mesh& mesh = cached_mesh(static_cast<int>(state.range(0)));
  ControlProblem problem(mesh, 1.0, 0.0);
  const SectorGeometry geometry = make_sector_geometry(3);
  const BoundaryPartition partition = partition_from_levelset(geometry,
                                                              init_levelset(geometry, mesh));
  const std::vector<double> alpha = {0.1, 10.0, 3.0};
  problem.set_reference(NodalField(mesh.vertex_count(), 0.0));
  const NodalField u = problem.solve_state(partition, alpha);
  const NodalField p = problem.solve_adjoint_for(u);
  const std::vector<double> flux = boundary_flux(mesh, p);
  for (auto _ : state) {
    TopoFields fields = build_topo_fields(geometry, partition, alpha, flux);
    benchmark::DoNotOptimize(fields.steering.data());
  }
}
BENCHMARK(bm_topo_fields)->Arg(6)->Arg(10)->Arg(14);

}  // namespace

BENCHMARK_MAIN();
