#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bctopt/control.hpp"
#include "bctopt/partition.hpp"
#include "bctopt/topo.hpp"

namespace bctopt {

/// Piecewise-constant vector level-set function, one value per boundary face.
using LevelSetField = std::vector<SectorVec>;

/// Initial level set placing every face in the last sector: for M=3 the
/// value z solving n^(1,3).z = n^(2,3).z = 1 (z = (1,1)); for M=2 the
/// value +1.
LevelSetField init_levelset(const SectorGeometry& geometry, const Mesh& mesh);

/// Labels every face by the sector its level-set value lies in.
BoundaryPartition partition_from_levelset(const SectorGeometry& geometry,
                                          const LevelSetField& psi);

/// Blended update psi' = (1-kappa)*psi + kappa*G per face, kappa in (0,1].
/// With normalize set, psi and the steering vector are scaled to unit
/// length first (vectors of norm <= 1e-14 pass through unscaled), so
/// kappa=1 yields the normalized steering field exactly.
LevelSetField update_levelset(const SectorGeometry& geometry, const LevelSetField& psi,
                              const TopoFields& fields, double kappa, bool normalize);

struct OptimizerConfig {
  double kappa0 = 0.1;
  double kappa_min = 1e-6;
  int max_outer_iterations = 100;
  int max_step_attempts = 20;
  /// Unit-normalize psi and the steering field before blending.  Off by
  /// default: the raw update lets large derivative magnitudes drive label
  /// flips at small kappa, which is what the reference step sizes assume.
  bool normalize = false;
  /// With lambda > 0, re-optimize alpha after every accepted step.
  bool optimize_alpha = false;
  /// Stop when an accepted step changes the cost by less than this
  /// relative amount.
  double relative_cost_tol = 1e-10;
};

struct HistoryRecord {
  int iteration = 0;
  double cost = 0.0;
  double kappa = 0.0;
  /// False only for the initial-state record.
  bool accepted = false;
  std::vector<double> areas;
  std::vector<double> alpha;
};

struct OptimState {
  int outer_iterations = 0;
  int accepted_steps = 0;
  LevelSetField psi;
  BoundaryPartition partition;
  std::vector<double> alpha;
  NodalField state;
  NodalField adjoint;
  double cost = 0.0;
  double kappa = 0.0;
  std::vector<HistoryRecord> history;
  std::string stop_reason;
};

/// Adjoint, cost-gradient flux and steering fields for one design.  The
/// flux is cost_gradient_flux (the exact per-area cost sensitivity), so
/// the derivative stacks built from it stay sign-reliable near control
/// interfaces where the single-tet normal derivative does not.
struct Sensitivities {
  NodalField adjoint;
  std::vector<double> flux;
  TopoFields fields;
};

Sensitivities compute_sensitivities(const ControlProblem& problem,
                                    const SectorGeometry& geometry,
                                    const BoundaryPartition& partition,
                                    std::span<const double> alpha, const NodalField& state);

/// Called at the top of every outer iteration with the current design and
/// its sensitivities (before any candidate step is tried).
using IterationCallback =
    std::function<void(const OptimState&, const Sensitivities&)>;

/// Level-set descent on the boundary partition.  Each outer iteration
/// computes the adjoint-based steering field once, then tries blended
/// candidate steps, halving kappa after every rejection; a candidate is
/// accepted only if it strictly decreases the cost, and acceptance resets
/// kappa to min(2*kappa, kappa0).  Only the state equation is solved for
/// candidates.  Stops on the iteration budget, on kappa falling below
/// kappa_min, or on relative cost stagnation.
OptimState optimize(const ControlProblem& problem, const SectorGeometry& geometry,
                    const ControlValues& controls, const OptimizerConfig& config,
                    const IterationCallback& on_iteration = {});

}  // namespace bctopt
