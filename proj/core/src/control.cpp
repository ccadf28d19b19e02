#include "bctopt/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bctopt {

void validate(const ControlValues& controls) {
  const std::size_t m = controls.alpha.size();
  if (controls.lower.size() != m || controls.upper.size() != m)
    throw std::invalid_argument("control bounds do not match the value count");
  for (std::size_t i = 0; i < m; ++i)
    if (!(controls.lower[i] <= controls.upper[i]))
      throw std::invalid_argument("control bounds for region " + std::to_string(i + 1) +
                                  " are empty (lower > upper)");
}

double cost(const SparseOperator& mass, const NodalField& u, const NodalField& u_ref,
            std::span<const double> alpha, double lambda) {
  if (u.size() != u_ref.size()) throw std::invalid_argument("state/reference size mismatch");
  NodalField diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - u_ref[i];
  double value = mass.inner(diff, diff);
  for (double a : alpha) value += lambda * a * a;
  return value;
}

NodalField solve_adjoint(const DirichletSolver& solver, const SparseOperator& mass,
                         const NodalField& u, const NodalField& u_ref) {
  if (u.size() != u_ref.size()) throw std::invalid_argument("state/reference size mismatch");
  NodalField diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - u_ref[i];
  NodalField load = mass.multiply(diff);
  for (double& v : load) v *= -2.0;
  const NodalField zero(u.size(), 0.0);
  return solver.solve(zero, load);
}

std::vector<double> boundary_flux(const Mesh& mesh, const NodalField& p) {
  if (static_cast<int>(p.size()) != mesh.vertex_count())
    throw std::invalid_argument("field length does not match the mesh");
  std::vector<double> flux(mesh.boundary_face_count());
  for (int f = 0; f < mesh.boundary_face_count(); ++f) {
    const int t = mesh.face_to_tet[f];
    const auto& tet = mesh.tets[t];
    const TetGeometry& g = mesh.tet_geometry[t];
    Vec3 grad{};
    for (int k = 0; k < 4; ++k) grad = grad + p[tet[k]] * g.basis_gradients[k];
    flux[f] = dot(grad, mesh.face_data[f].normal);
  }
  return flux;
}

std::vector<double> cost_gradient_flux(const ControlProblem& problem, const NodalField& u,
                                       const NodalField& adjoint) {
  const Mesh& mesh = problem.mesh();
  const NodalField& u_ref = problem.reference();
  if (static_cast<int>(u.size()) != mesh.vertex_count() || u.size() != adjoint.size())
    throw std::invalid_argument("field length does not match the mesh");

  // d(cost)/d(g_v) at a boundary vertex v is (K p + 2 M (u - u_ref))_v; at
  // interior vertices the same expression is the adjoint residual and
  // vanishes up to solver tolerance.
  NodalField diff(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - u_ref[i];
  NodalField grad = problem.stiffness().multiply(adjoint);
  const NodalField mass_diff = problem.mass().multiply(diff);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += 2.0 * mass_diff[i];

  // The face control reaches g_v with weight area_F / (total incident
  // area), matching project_boundary_control; fold that in and divide by
  // area_F to express the sensitivity per unit area.
  std::vector<double> incident_area(mesh.vertex_count(), 0.0);
  for (int f = 0; f < mesh.boundary_face_count(); ++f)
    for (int v : mesh.boundary_faces[f]) incident_area[v] += mesh.face_data[f].area;
  std::vector<double> flux(mesh.boundary_face_count(), 0.0);
  for (int f = 0; f < mesh.boundary_face_count(); ++f) {
    double sum = 0.0;
    for (int v : mesh.boundary_faces[f]) sum += grad[v] / incident_area[v];
    flux[f] = sum;
  }
  return flux;
}

std::vector<double> region_flux_integrals(const Mesh& mesh, const BoundaryPartition& partition,
                                          const std::vector<double>& flux) {
  if (static_cast<int>(flux.size()) != mesh.boundary_face_count())
    throw std::invalid_argument("flux length does not match the mesh boundary");
  std::vector<double> integrals(partition.material_count, 0.0);
  for (int f = 0; f < mesh.boundary_face_count(); ++f)
    integrals[partition.labels[f] - 1] += mesh.face_data[f].area * flux[f];
  return integrals;
}

double project_to_interval(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

double project_control_value(double integral, double lambda, double lo, double hi) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("control projection requires lambda > 0");
  return project_to_interval(integral / (2.0 * lambda), lo, hi);
}

AlphaUpdate optimal_alpha(const Mesh& mesh, const BoundaryPartition& partition,
                          const std::vector<double>& flux, double lambda,
                          std::span<const double> lower, std::span<const double> upper) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("optimal control values require lambda > 0");
  const int m = partition.material_count;
  if (static_cast<int>(lower.size()) != m || static_cast<int>(upper.size()) != m)
    throw std::invalid_argument("control bounds do not match the material count");
  const std::vector<double> integrals = region_flux_integrals(mesh, partition, flux);
  const std::vector<int> counts = region_face_counts(partition);

  AlphaUpdate result;
  result.alpha.resize(m);
  result.region_empty.resize(m);
  for (int i = 0; i < m; ++i) {
    result.region_empty[i] = counts[i] == 0 ? 1 : 0;
    // Stationarity along alpha_i reads 2*lambda*alpha_i + integral_i = 0,
    // so the projected value is taken at -integral_i / (2*lambda).  Empty
    // regions contribute nothing to the state and get the projected zero.
    const double integral = counts[i] == 0 ? 0.0 : -integrals[i];
    result.alpha[i] = project_control_value(integral, lambda, lower[i], upper[i]);
  }
  return result;
}

ControlProblem::ControlProblem(const Mesh& mesh, double source_value, double lambda,
                               CgOptions solver_options)
    : mesh_(&mesh),
      lambda_(lambda),
      stiffness_(assemble_stiffness(mesh)),
      mass_(assemble_mass(mesh)),
      source_load_(constant_source_load(mesh, source_value)),
      solver_(mesh, stiffness_, solver_options) {}

void ControlProblem::set_reference(NodalField u_ref) {
  if (static_cast<int>(u_ref.size()) != mesh_->vertex_count())
    throw std::invalid_argument("reference field length does not match the mesh");
  u_ref_ = std::move(u_ref);
  has_reference_ = true;
}

const NodalField& ControlProblem::reference() const {
  if (!has_reference_) throw std::logic_error("reference state has not been set");
  return u_ref_;
}

NodalField ControlProblem::solve_state(const BoundaryPartition& partition,
                                       std::span<const double> alpha) const {
  const NodalField g = project_boundary_control(*mesh_, partition, alpha);
  return solver_.solve(g, source_load_);
}

double ControlProblem::state_cost(const NodalField& u, std::span<const double> alpha) const {
  return cost(mass_, u, reference(), alpha, lambda_);
}

NodalField ControlProblem::solve_adjoint_for(const NodalField& u) const {
  return solve_adjoint(solver_, mass_, u, reference());
}

FixedPointResult optimal_alpha_fixed_point(const ControlProblem& problem,
                                           const BoundaryPartition& partition,
                                           const ControlValues& start, double theta, double tol,
                                           int max_iterations) {
  validate(start);
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("damping factor must lie in (0, 1]");

  FixedPointResult result;
  result.alpha = start.alpha;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    const NodalField u = problem.solve_state(partition, result.alpha);
    const NodalField p = problem.solve_adjoint_for(u);
    const std::vector<double> flux = boundary_flux(problem.mesh(), p);
    const AlphaUpdate update = optimal_alpha(problem.mesh(), partition, flux, problem.lambda(),
                                             start.lower, start.upper);
    double change = 0.0;
    for (std::size_t i = 0; i < result.alpha.size(); ++i) {
      const double next = (1.0 - theta) * result.alpha[i] + theta * update.alpha[i];
      change = std::max(change, std::abs(next - result.alpha[i]));
      result.alpha[i] = next;
    }
    result.iterations = iter;
    if (change <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace bctopt
