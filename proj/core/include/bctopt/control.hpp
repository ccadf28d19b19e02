#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bctopt/fem.hpp"
#include "bctopt/mesh.hpp"
#include "bctopt/partition.hpp"
#include "bctopt/sparse.hpp"

namespace bctopt {

/// Piecewise-constant boundary control values with per-region box bounds.
struct ControlValues {
  std::vector<double> alpha;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Throws std::invalid_argument unless sizes are consistent and lower <= upper.
void validate(const ControlValues& controls);

/// Tracking cost: (u - u_ref)^T M (u - u_ref) + lambda * |alpha|^2.
double cost(const SparseOperator& mass, const NodalField& u, const NodalField& u_ref,
            std::span<const double> alpha, double lambda);

/// Adjoint state: zero Dirichlet data, load -2 M (u - u_ref).  The solver
/// must wrap the same stiffness matrix that produced u.
NodalField solve_adjoint(const DirichletSolver& solver, const SparseOperator& mass,
                         const NodalField& u, const NodalField& u_ref);

/// Outward normal derivative of a nodal field on every boundary face,
/// evaluated from the constant P1 gradient of the adjacent tet.
std::vector<double> boundary_flux(const Mesh& mesh, const NodalField& p);

/// Per-region boundary integrals of a face flux: sum of area * flux.
std::vector<double> region_flux_integrals(const Mesh& mesh, const BoundaryPartition& partition,
                                          const std::vector<double>& flux);

double project_to_interval(double x, double lo, double hi);

/// Box projection of the unconstrained control value integral/(2*lambda).
/// Requires lambda > 0.
double project_control_value(double integral, double lambda, double lo, double hi);

struct AlphaUpdate {
  std::vector<double> alpha;
  std::vector<std::uint8_t> region_empty;
};

/// Projected optimal control per region for a fixed adjoint flux.  Along
/// alpha_i the cost is quadratic with gradient 2*lambda*alpha_i + I_i,
/// where I_i is the region integral of the adjoint flux, so the
/// unconstrained minimizer is -I_i/(2*lambda); it is then box-projected.
/// Regions with no faces get the projection of zero and are flagged empty.
/// Requires lambda > 0.
AlphaUpdate optimal_alpha(const Mesh& mesh, const BoundaryPartition& partition,
                          const std::vector<double>& flux, double lambda,
                          std::span<const double> lower, std::span<const double> upper);

/// Assembled operators, solver and reference data for one control problem.
/// Construct once per mesh; set_reference() before evaluating costs or
/// adjoints.  solve_state is const and safe to call concurrently.
class ControlProblem {
 public:
  ControlProblem(const Mesh& mesh, double source_value, double lambda,
                 CgOptions solver_options = {});

  const Mesh& mesh() const { return *mesh_; }
  const SparseOperator& stiffness() const { return stiffness_; }
  const SparseOperator& mass() const { return mass_; }
  const DirichletSolver& solver() const { return solver_; }
  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }

  void set_reference(NodalField u_ref);
  const NodalField& reference() const;

  /// State solve for the given boundary partition and control values.
  NodalField solve_state(const BoundaryPartition& partition,
                         std::span<const double> alpha) const;

  /// Cost of a state against the stored reference.
  double state_cost(const NodalField& u, std::span<const double> alpha) const;

  /// Adjoint driven by the mismatch of u against the stored reference.
  NodalField solve_adjoint_for(const NodalField& u) const;

 private:
  const Mesh* mesh_;
  double lambda_;
  SparseOperator stiffness_;
  SparseOperator mass_;
  NodalField source_load_;
  DirichletSolver solver_;
  NodalField u_ref_;
  bool has_reference_ = false;
};

/// Exact first-order sensitivity of the tracking cost to each face's
/// control value, expressed per unit area so it plugs into the same
/// topological-derivative formula as boundary_flux.  Changing the control
/// on face F from a to b changes the cost by area_F * (b - a) * flux_F plus
/// terms quadratic in (b - a).  Computed from the boundary residual
/// K p + 2 M (u - u_ref) of the adjoint equation pushed through the
/// area weights of project_boundary_control.  Both boundary_flux and this
/// function discretize the adjoint's outward normal derivative; this one
/// keeps its sign information reliable on faces near control interfaces,
/// where the single-tet gradient degrades, so the optimizer steers with it.
std::vector<double> cost_gradient_flux(const ControlProblem& problem, const NodalField& u,
                                       const NodalField& adjoint);

struct FixedPointResult {
  std::vector<double> alpha;
  int iterations = 0;
  bool converged = false;
};

/// Damped fixed-point iteration for the coupled optimal control: each pass
/// re-solves state and adjoint at the current alpha, applies optimal_alpha
/// and blends alpha <- (1-theta)*alpha + theta*update.  Stops when the
/// max-norm change drops to tol or after max_iterations passes.
FixedPointResult optimal_alpha_fixed_point(const ControlProblem& problem,
                                           const BoundaryPartition& partition,
                                           const ControlValues& start, double theta = 0.5,
                                           double tol = 1e-8, int max_iterations = 100);

}  // namespace bctopt
