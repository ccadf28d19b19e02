#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bctopt/mesh.hpp"
#include "bctopt/partition.hpp"
#include "bctopt/sparse.hpp"

namespace bctopt {

/// One double per mesh vertex (P1 nodal coefficients).
using NodalField = std::vector<double>;

/// P1 stiffness matrix: K_ij = sum over tets of vol * grad(phi_i).grad(phi_j).
SparseOperator assemble_stiffness(const Mesh& mesh);

/// Consistent P1 mass matrix (element matrix vol/20, doubled diagonal).
SparseOperator assemble_mass(const Mesh& mesh);

/// Load vector for a constant volumetric source: vol(T)*f/4 per tet vertex.
NodalField constant_source_load(const Mesh& mesh, double f);

/// Load vector for a P1 source field: mass * f.
NodalField source_load(const SparseOperator& mass, const NodalField& f);

/// L2 inner product of two nodal fields through the mass matrix.
double l2_inner(const SparseOperator& mass, const NodalField& a, const NodalField& b);

/// Nodal field equal to fn at boundary vertices and zero at interior ones.
NodalField boundary_trace(const Mesh& mesh, const std::function<double(const Vec3&)>& fn);

/// Nodal interpolant of fn at every vertex.
NodalField interpolate(const Mesh& mesh, const std::function<double(const Vec3&)>& fn);

/// Dirichlet trace of a piecewise-constant boundary control: each boundary
/// vertex gets the area-weighted average of alpha[label-1] over its
/// incident boundary faces; interior vertices get zero.
NodalField project_boundary_control(const Mesh& mesh, const BoundaryPartition& partition,
                                    std::span<const double> alpha);

/// Poisson solver with Dirichlet data, reusable across right-hand sides.
/// The constructor splits the stiffness matrix into interior-interior and
/// interior-boundary blocks once; solve() then homogenizes the boundary
/// data and runs Jacobi-preconditioned CG on the interior unknowns.
class DirichletSolver {
 public:
  DirichletSolver(const Mesh& mesh, const SparseOperator& stiffness, CgOptions options = {});

  /// boundary_values must be zero at interior vertices (exactly; the
  /// projection and trace helpers produce that).  load is a full-length
  /// P1 load vector.  The returned field carries boundary_values verbatim
  /// on the boundary.
  NodalField solve(const NodalField& boundary_values, const NodalField& load) const;

  int interior_count() const { return static_cast<int>(interior_vertices_.size()); }
  const CgOptions& options() const { return options_; }

 private:
  int vertex_count_ = 0;
  CgOptions options_;
  std::vector<int> interior_vertices_;      // interior index -> vertex
  std::vector<int> interior_index_;         // vertex -> interior index or -1
  SparseOperator interior_matrix_;          // K_II
  SparseOperator coupling_matrix_;          // K_IB (columns in vertex numbering)
};

/// One-shot convenience wrapper around DirichletSolver for a constant source.
NodalField solve_dirichlet(const Mesh& mesh, const SparseOperator& stiffness,
                           const NodalField& boundary_values, double f,
                           CgOptions options = {});

}  // namespace bctopt
