#include "bctopt/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bctopt {

LevelSetField init_levelset(const SectorGeometry& geometry, const Mesh& mesh) {
  SectorVec value{1.0, 0.0};
  if (geometry.material_count() == 3) {
    // Solve n^(1,3).z = n^(2,3).z = 1; the last sector matrix stacks
    // exactly those normals.
    const SectorMatrix& inv = geometry.inverse_matrix(geometry.material_count());
    value = {inv[0][0] + inv[0][1], inv[1][0] + inv[1][1]};
  }
  return LevelSetField(mesh.boundary_face_count(), value);
}

BoundaryPartition partition_from_levelset(const SectorGeometry& geometry,
                                          const LevelSetField& psi) {
  BoundaryPartition partition;
  partition.material_count = geometry.material_count();
  partition.labels.resize(psi.size());
  for (std::size_t f = 0; f < psi.size(); ++f)
    partition.labels[f] = sector_of(geometry, psi[f]);
  return partition;
}

namespace {

SectorVec normalized_or_same(const SectorVec& v, int dim) {
  const double n = sector_norm(v, dim);
  if (n <= 1e-14) return v;
  SectorVec out{0.0, 0.0};
  for (int d = 0; d < dim; ++d) out[d] = v[d] / n;
  return out;
}

}  // namespace

LevelSetField update_levelset(const SectorGeometry& geometry, const LevelSetField& psi,
                              const TopoFields& fields, double kappa, bool normalize) {
  if (!(kappa > 0.0) || kappa > 1.0)
    throw std::invalid_argument("step parameter must lie in (0, 1]");
  if (fields.steering.size() != psi.size())
    throw std::invalid_argument("steering field does not match the level set");
  const int dim = geometry.dim();
  LevelSetField next(psi.size(), SectorVec{0.0, 0.0});
  for (std::size_t f = 0; f < psi.size(); ++f) {
    const SectorVec p = normalize ? normalized_or_same(psi[f], dim) : psi[f];
    const SectorVec g = normalize ? normalized_or_same(fields.steering[f], dim)
                                  : fields.steering[f];
    for (int d = 0; d < dim; ++d) next[f][d] = (1.0 - kappa) * p[d] + kappa * g[d];
  }
  return next;
}

Sensitivities compute_sensitivities(const ControlProblem& problem,
                                    const SectorGeometry& geometry,
                                    const BoundaryPartition& partition,
                                    std::span<const double> alpha, const NodalField& state) {
  Sensitivities s;
  s.adjoint = problem.solve_adjoint_for(state);
  s.flux = cost_gradient_flux(problem, state, s.adjoint);
  s.fields = build_topo_fields(geometry, partition, alpha, s.flux);
  return s;
}

namespace {

HistoryRecord make_record(const Mesh& mesh, const OptimState& state, bool accepted) {
  HistoryRecord rec;
  rec.iteration = state.outer_iterations;
  rec.cost = state.cost;
  rec.kappa = state.kappa;
  rec.accepted = accepted;
  rec.areas = region_areas(mesh, state.partition);
  rec.alpha = state.alpha;
  return rec;
}

}  // namespace

OptimState optimize(const ControlProblem& problem, const SectorGeometry& geometry,
                    const ControlValues& controls, const OptimizerConfig& config,
                    const IterationCallback& on_iteration) {
  validate(controls);
  if (!(config.kappa0 > 0.0) || config.kappa0 > 1.0)
    throw std::invalid_argument("initial step parameter must lie in (0, 1]");
  if (!(config.kappa_min > 0.0))
    throw std::invalid_argument("minimal step parameter must be positive");
  if (config.optimize_alpha && !(problem.lambda() > 0.0))
    throw std::invalid_argument("control optimization requires lambda > 0");

  const Mesh& mesh = problem.mesh();

  OptimState state;
  state.psi = init_levelset(geometry, mesh);
  state.partition = partition_from_levelset(geometry, state.psi);
  state.alpha = controls.alpha;
  state.state = problem.solve_state(state.partition, state.alpha);
  state.cost = problem.state_cost(state.state, state.alpha);
  state.kappa = config.kappa0;
  state.history.push_back(make_record(mesh, state, false));

  double kappa = config.kappa0;
  while (state.outer_iterations < config.max_outer_iterations) {
    state.outer_iterations += 1;

    const Sensitivities sens =
        compute_sensitivities(problem, geometry, state.partition, state.alpha, state.state);
    state.adjoint = sens.adjoint;
    const TopoFields& fields = sens.fields;
    if (on_iteration) on_iteration(state, sens);

    bool accepted = false;
    bool underflow = false;
    for (int attempt = 0; attempt < config.max_step_attempts; ++attempt) {
      const LevelSetField candidate_psi =
          update_levelset(geometry, state.psi, fields, kappa, config.normalize);
      const BoundaryPartition candidate_partition =
          partition_from_levelset(geometry, candidate_psi);
      const NodalField candidate_state =
          problem.solve_state(candidate_partition, state.alpha);
      const double candidate_cost = problem.state_cost(candidate_state, state.alpha);

      if (candidate_cost < state.cost) {
        const double previous_cost = state.cost;
        state.psi = candidate_psi;
        state.partition = candidate_partition;
        state.state = candidate_state;
        state.cost = candidate_cost;
        state.kappa = kappa;
        state.accepted_steps += 1;
        accepted = true;

        if (config.optimize_alpha) {
          ControlValues current = controls;
          current.alpha = state.alpha;
          const FixedPointResult fixed =
              optimal_alpha_fixed_point(problem, state.partition, current);
          state.alpha = fixed.alpha;
          state.state = problem.solve_state(state.partition, state.alpha);
          state.cost = problem.state_cost(state.state, state.alpha);
        }

        state.history.push_back(make_record(mesh, state, true));
        kappa = std::min(2.0 * kappa, config.kappa0);

        const double denom = std::max(std::abs(previous_cost), 1e-300);
        if (std::abs(previous_cost - state.cost) / denom < config.relative_cost_tol) {
          state.stop_reason = "cost_stagnation";
          return state;
        }
        break;
      }

      kappa *= 0.5;
      if (kappa < config.kappa_min) {
        underflow = true;
        break;
      }
    }

    if (!accepted && (underflow || kappa < config.kappa_min)) {
      state.stop_reason = "step_size_underflow";
      return state;
    }
  }

  state.stop_reason = "max_iterations";
  return state;
}

}  // namespace bctopt
