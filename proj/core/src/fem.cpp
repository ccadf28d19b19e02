#include "bctopt/fem.hpp"

#include <stdexcept>
#include <string>

namespace bctopt {

SparseOperator assemble_stiffness(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.tets.size() * 16);
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const auto& tet = mesh.tets[t];
    const TetGeometry& g = mesh.tet_geometry[t];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        triplets.push_back(
            {tet[i], tet[j], g.volume * dot(g.basis_gradients[i], g.basis_gradients[j])});
  }
  return SparseOperator::from_triplets(mesh.vertex_count(), std::move(triplets));
}

SparseOperator assemble_mass(const Mesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.tets.size() * 16);
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const auto& tet = mesh.tets[t];
    const double w = mesh.tet_geometry[t].volume / 20.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) triplets.push_back({tet[i], tet[j], i == j ? 2.0 * w : w});
  }
  return SparseOperator::from_triplets(mesh.vertex_count(), std::move(triplets));
}

NodalField constant_source_load(const Mesh& mesh, double f) {
  NodalField load(mesh.vertex_count(), 0.0);
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const double w = mesh.tet_geometry[t].volume * f / 4.0;
    for (int v : mesh.tets[t]) load[v] += w;
  }
  return load;
}

NodalField source_load(const SparseOperator& mass, const NodalField& f) {
  return mass.multiply(f);
}

double l2_inner(const SparseOperator& mass, const NodalField& a, const NodalField& b) {
  return mass.inner(a, b);
}

NodalField boundary_trace(const Mesh& mesh, const std::function<double(const Vec3&)>& fn) {
  NodalField g(mesh.vertex_count(), 0.0);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.boundary_vertex_flags[v]) g[v] = fn(mesh.vertices[v]);
  return g;
}

NodalField interpolate(const Mesh& mesh, const std::function<double(const Vec3&)>& fn) {
  NodalField u(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] = fn(mesh.vertices[v]);
  return u;
}

NodalField project_boundary_control(const Mesh& mesh, const BoundaryPartition& partition,
                                    std::span<const double> alpha) {
  if (static_cast<int>(partition.labels.size()) != mesh.boundary_face_count())
    throw std::invalid_argument("partition does not match the mesh boundary");
  NodalField weighted(mesh.vertex_count(), 0.0);
  NodalField total_area(mesh.vertex_count(), 0.0);
  for (int f = 0; f < mesh.boundary_face_count(); ++f) {
    const int label = partition.labels[f];
    if (label < 1 || label > static_cast<int>(alpha.size()))
      throw std::invalid_argument("face " + std::to_string(f) + " has label " +
                                  std::to_string(label) + " outside 1.." +
                                  std::to_string(alpha.size()));
    const double area = mesh.face_data[f].area;
    for (int v : mesh.boundary_faces[f]) {
      weighted[v] += area * alpha[label - 1];
      total_area[v] += area;
    }
  }
  NodalField g(mesh.vertex_count(), 0.0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.boundary_vertex_flags[v]) continue;
    if (total_area[v] <= 0.0)
      throw MeshError("vertex " + std::to_string(v) +
                      " is flagged boundary but has no incident boundary face");
    g[v] = weighted[v] / total_area[v];
  }
  return g;
}

DirichletSolver::DirichletSolver(const Mesh& mesh, const SparseOperator& stiffness,
                                 CgOptions options)
    : vertex_count_(mesh.vertex_count()), options_(options) {
  if (stiffness.size() != vertex_count_)
    throw std::invalid_argument("stiffness matrix does not match the mesh");

  interior_index_.assign(vertex_count_, -1);
  for (int v = 0; v < vertex_count_; ++v) {
    if (!mesh.boundary_vertex_flags[v]) {
      interior_index_[v] = static_cast<int>(interior_vertices_.size());
      interior_vertices_.push_back(v);
    }
  }

  const auto row_ptr = stiffness.row_pointers();
  const auto cols = stiffness.columns();
  const auto values = stiffness.values();
  std::vector<Triplet> interior, coupling;
  for (int i = 0; i < static_cast<int>(interior_vertices_.size()); ++i) {
    const int v = interior_vertices_[i];
    for (int k = row_ptr[v]; k < row_ptr[v + 1]; ++k) {
      const int w = cols[k];
      if (interior_index_[w] >= 0)
        interior.push_back({i, interior_index_[w], values[k]});
      else
        coupling.push_back({i, w, values[k]});
    }
  }
  interior_matrix_ =
      SparseOperator::from_triplets(static_cast<int>(interior_vertices_.size()),
                                    std::move(interior));
  // Coupling rows are interior-indexed but columns keep vertex numbering,
  // so pad the square operator to the full vertex count.
  coupling_matrix_ = SparseOperator::from_triplets(
      std::max(vertex_count_, static_cast<int>(interior_vertices_.size())),
      std::move(coupling));
}

NodalField DirichletSolver::solve(const NodalField& boundary_values,
                                  const NodalField& load) const {
  if (static_cast<int>(boundary_values.size()) != vertex_count_ ||
      static_cast<int>(load.size()) != vertex_count_)
    throw std::invalid_argument("field length does not match the mesh");
  for (int v = 0; v < vertex_count_; ++v)
    if (interior_index_[v] >= 0 && boundary_values[v] != 0.0)
      throw std::invalid_argument("boundary data is nonzero at interior vertex " +
                                  std::to_string(v));

  const int n = static_cast<int>(interior_vertices_.size());
  std::vector<double> lifted(vertex_count_, 0.0);
  coupling_matrix_.multiply(boundary_values, lifted);
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = load[interior_vertices_[i]] - lifted[i];

  std::vector<double> x;
  conjugate_gradient(interior_matrix_, rhs, x, options_);

  NodalField u = boundary_values;
  for (int i = 0; i < n; ++i) u[interior_vertices_[i]] = x[i];
  return u;
}

NodalField solve_dirichlet(const Mesh& mesh, const SparseOperator& stiffness,
                           const NodalField& boundary_values, double f, CgOptions options) {
  const DirichletSolver solver(mesh, stiffness, options);
  return solver.solve(boundary_values, constant_source_load(mesh, f));
}

}  // namespace bctopt
