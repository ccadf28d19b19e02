#pragma once

// Hand-built meshes small enough that stiffness rows, adjoint values and
// boundary fluxes can be worked out by hand and asserted exactly.

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "bctopt/mesh.hpp"

namespace test_helpers {

// Regular octahedron (vertices on the coordinate axes) triangulated by
// coning its 8 faces to a single interior vertex at the origin.  Every tet
// has volume 1/6, every boundary face area sqrt(3)/2; vertex 0 is the only
// interior vertex and the Dirichlet problem has exactly one unknown.
inline bctopt::Mesh octahedron_mesh() {
  bctopt::Mesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                   {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  mesh.tets = {{0, 1, 3, 5}, {0, 3, 2, 5}, {0, 2, 4, 5}, {0, 4, 1, 5},
               {0, 3, 1, 6}, {0, 2, 3, 6}, {0, 4, 2, 6}, {0, 1, 4, 6}};
  finalize_mesh(mesh);
  return mesh;
}

// Reference tetrahedron (unit corner simplex), volume 1/6, no interior
// vertex.
inline bctopt::Mesh unit_tet_mesh() {
  bctopt::Mesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  mesh.tets = {{0, 1, 2, 3}};
  finalize_mesh(mesh);
  return mesh;
}

// Unique writable scratch path; files are small and the OS cleans /tmp.
inline std::string scratch_path(const std::string& stem) {
  static std::mt19937_64 rng{std::random_device{}()};
  const auto dir = std::filesystem::temp_directory_path();
  return (dir / (stem + "_" + std::to_string(rng()))).string();
}

}  // namespace test_helpers
