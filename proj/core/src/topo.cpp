#include "bctopt/topo.hpp"

#include <cmath>
#include <string>

namespace bctopt {

namespace {

SectorMatrix identity_matrix() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

SectorMatrix invert(const SectorMatrix& m, int label) {
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (det == 0.0 || !std::isfinite(det))
    throw SectorError("sector matrix for label " + std::to_string(label) + " is singular");
  return {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

SectorVec mat_vec(const SectorMatrix& m, const SectorVec& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

}  // namespace

SectorGeometry::SectorGeometry(int material_count) : material_count_(material_count) {
  if (material_count != 2 && material_count != 3)
    throw SectorError("sector geometry supports 2 or 3 materials, got " +
                      std::to_string(material_count));

  auto set_normal = [this](int i, int j, SectorVec n) {
    normals_[(i - 1) * 3 + (j - 1)] = n;
    normals_[(j - 1) * 3 + (i - 1)] = {-n[0], -n[1]};
  };

  if (material_count == 2) {
    // One axis: sector 1 is psi < 0, sector 2 is psi > 0.
    set_normal(1, 2, {1.0, 0.0});
  } else {
    const double r = 1.0 / std::sqrt(2.0);
    set_normal(1, 2, {r, -r});
    set_normal(1, 3, {1.0, 0.0});
    set_normal(2, 3, {0.0, 1.0});
  }

  for (int label = 1; label <= material_count; ++label) {
    SectorMatrix m = identity_matrix();
    int row = 0;
    for (int j = 1; j <= material_count; ++j) {
      if (j == label) continue;
      const SectorVec& n = normal(j, label);
      m[row][0] = n[0];
      if (dim() == 2) m[row][1] = n[1];
      ++row;
    }
    matrices_[label - 1] = m;
    inverses_[label - 1] = invert(m, label);
  }
}

const SectorVec& SectorGeometry::normal(int i, int j) const {
  if (i < 1 || i > material_count_ || j < 1 || j > material_count_ || i == j)
    throw SectorError("normal(" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is not defined");
  return normals_[(i - 1) * 3 + (j - 1)];
}

SectorGeometry make_sector_geometry(int material_count) {
  return SectorGeometry(material_count);
}

int sector_of(const SectorGeometry& geometry, const SectorVec& psi, double tie_tol) {
  const int dim = geometry.dim();
  for (int label = 1; label <= geometry.material_count(); ++label) {
    bool inside = true;
    for (int j = 1; j <= geometry.material_count() && inside; ++j) {
      if (j == label) continue;
      if (sector_dot(psi, geometry.normal(j, label), dim) < -tie_tol) inside = false;
    }
    if (inside) return label;
  }
  throw SectorError("level-set value lies in no sector (non-finite input?)");
}

double topological_derivative_fixed_alpha(int i, int j, std::span<const double> alpha,
                                          double flux_value) {
  const int m = static_cast<int>(alpha.size());
  if (i < 1 || i > m || j < 1 || j > m)
    throw SectorError("material pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") outside 1.." + std::to_string(m));
  if (i == j) return 0.0;
  return -(alpha[i - 1] - alpha[j - 1]) * flux_value;
}

TopoFields build_topo_fields(const SectorGeometry& geometry, const BoundaryPartition& partition,
                             std::span<const double> alpha, const std::vector<double>& flux) {
  if (partition.material_count != geometry.material_count())
    throw SectorError("partition material count does not match the sector geometry");
  if (flux.size() != partition.labels.size())
    throw SectorError("flux length does not match the partition");
  if (static_cast<int>(alpha.size()) < geometry.material_count())
    throw SectorError("control vector shorter than the material count");

  const int face_count = static_cast<int>(partition.labels.size());
  TopoFields fields;
  fields.derivative_stack.assign(face_count, SectorVec{0.0, 0.0});
  fields.steering.assign(face_count, SectorVec{0.0, 0.0});
  for (int f = 0; f < face_count; ++f) {
    const int label = partition.labels[f];
    SectorVec stack{0.0, 0.0};
    int row = 0;
    for (int k = 1; k <= geometry.material_count(); ++k) {
      if (k == label) continue;
      stack[row++] = topological_derivative_fixed_alpha(label, k, alpha, flux[f]);
    }
    fields.derivative_stack[f] = stack;
    fields.steering[f] = mat_vec(geometry.inverse_matrix(label), stack);
  }
  return fields;
}

double fd_topological_derivative(const ControlProblem& problem,
                                 const BoundaryPartition& partition, int face, int from_label,
                                 int to_label, std::span<const double> alpha, double base_cost) {
  const Mesh& mesh = problem.mesh();
  if (face < 0 || face >= mesh.boundary_face_count())
    throw SectorError("face index " + std::to_string(face) + " out of range");
  if (partition.labels[face] != from_label)
    throw SectorError("face " + std::to_string(face) + " is labeled " +
                      std::to_string(partition.labels[face]) + ", not " +
                      std::to_string(from_label));
  if (from_label == to_label) return 0.0;
  if (to_label < 1 || to_label > partition.material_count)
    throw SectorError("target label " + std::to_string(to_label) + " outside 1.." +
                      std::to_string(partition.material_count));

  BoundaryPartition perturbed = partition;
  perturbed.labels[face] = to_label;
  const NodalField u = problem.solve_state(perturbed, alpha);
  const double perturbed_cost = problem.state_cost(u, alpha);
  return (perturbed_cost - base_cost) / mesh.face_data[face].area;
}

}  // namespace bctopt
