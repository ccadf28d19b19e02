#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "bctopt/control.hpp"
#include "bctopt/geometry.hpp"
#include "bctopt/partition.hpp"

namespace bctopt {

struct SectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-major square matrix of the sector dimension (padded to 2x2; the
/// padding stays the identity so dim-1 products are scalar products).
using SectorMatrix = std::array<std::array<double, 2>, 2>;

/// Partition of R^(M-1) into M open sectors s_l = {x : n^(j,l).x > 0 for
/// all j != l}, with pairwise unit normals n^(i,j) = -n^(j,i) and per-label
/// matrices N^l whose rows stack n^(j,l) over ascending j != l.
class SectorGeometry {
 public:
  /// material_count must be 2 or 3.  M=2 uses scalar normals n^(1,2)=+1,
  /// n^(2,1)=-1, so s_1 = {psi < 0} and s_2 = {psi > 0}.
  explicit SectorGeometry(int material_count);

  int material_count() const { return material_count_; }
  int dim() const { return material_count_ - 1; }

  /// n^(i,j), 1-based labels, i != j.
  const SectorVec& normal(int i, int j) const;

  const SectorMatrix& matrix(int label) const { return matrices_[label - 1]; }
  const SectorMatrix& inverse_matrix(int label) const { return inverses_[label - 1]; }

 private:
  int material_count_ = 0;
  std::array<SectorVec, 9> normals_{};
  std::array<SectorMatrix, 3> matrices_{};
  std::array<SectorMatrix, 3> inverses_{};
};

SectorGeometry make_sector_geometry(int material_count);

/// Smallest label l with psi.n^(j,l) >= -tie_tol for every j != l.  The
/// tolerance keeps faces on sector boundaries deterministic; psi = 0 maps
/// to label 1.
int sector_of(const SectorGeometry& geometry, const SectorVec& psi, double tie_tol = 1e-12);

/// Cost change per unit area for relabeling a point of region i to region
/// j, given the adjoint flux there: -(alpha_i - alpha_j) * flux.  i == j
/// returns exactly zero.
double topological_derivative_fixed_alpha(int i, int j, std::span<const double> alpha,
                                          double flux_value);

/// Per-face derivative stacks and the steering field they induce.
/// derivative_stack[F] holds the derivatives toward the other labels in
/// ascending label order; steering[F] = inverse(N^l) * stack, so that
/// steering.n^(j,l) recovers the derivative toward j.
struct TopoFields {
  std::vector<SectorVec> derivative_stack;
  std::vector<SectorVec> steering;
};

TopoFields build_topo_fields(const SectorGeometry& geometry, const BoundaryPartition& partition,
                             std::span<const double> alpha, const std::vector<double>& flux);

/// Finite-difference probe of the topological derivative: relabels face
/// from from_label to to_label on a private copy, re-solves the state and
/// returns (J_perturbed - base_cost) / face area.  from_label must be the
/// face's current label; from_label == to_label returns exactly zero.
double fd_topological_derivative(const ControlProblem& problem,
                                 const BoundaryPartition& partition, int face, int from_label,
                                 int to_label, std::span<const double> alpha, double base_cost);

}  // namespace bctopt
