#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bctopt/geometry.hpp"

namespace bctopt {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Area, centroid and outward unit normal of one boundary triangle.
struct FaceGeometry {
  double area = 0.0;
  Vec3 centroid;
  Vec3 normal;
};

/// Volume and the four constant P1 basis gradients of one tetrahedron.
struct TetGeometry {
  double volume = 0.0;
  std::array<Vec3, 4> basis_gradients;
};

/// Conforming tetrahedral mesh with an explicit boundary triangulation.
/// Call finalize_mesh() after filling vertices/tets (and optionally
/// boundary_faces); it orients everything, builds the connectivity and
/// caches, and validates the structural invariants.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<int, 3>> boundary_faces;

  // Filled by finalize_mesh().
  std::vector<int> face_to_tet;
  std::vector<std::uint8_t> boundary_vertex_flags;
  std::vector<TetGeometry> tet_geometry;
  std::vector<FaceGeometry> face_data;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int tet_count() const { return static_cast<int>(tets.size()); }
  int boundary_face_count() const { return static_cast<int>(boundary_faces.size()); }
};

/// Orients tets to positive volume (silently reordering inverted ones),
/// derives or validates the boundary triangulation, orients boundary faces
/// outward, and fills the connectivity and geometry caches.  Throws
/// MeshError naming the offending entity on any structural violation.
void finalize_mesh(Mesh& mesh);

/// Structured ellipsoid mesh with semi-axes (a1, a2, a3): the cube
/// [-1,1]^3 is split into n^3 cells of 6 tetrahedra each, lattice points
/// are mapped radially onto nested spheres (x -> x * |x|_inf / |x|_2) and
/// then scaled per axis.  Requires n >= 2 and positive axes.
Mesh generate_ellipsoid_mesh(double a1, double a2, double a3, int n);

/// Geometry of one boundary face, computed fresh from vertex coordinates.
/// The normal is oriented outward via the adjacent tet centroid.
FaceGeometry face_geometry(const Mesh& mesh, int face);

/// Sum of tetrahedron volumes.
double mesh_volume(const Mesh& mesh);

/// Sum of boundary face areas.
double surface_area(const Mesh& mesh);

/// Volume computed from the boundary alone via the divergence theorem:
/// sum over faces of (1/3) * area * dot(centroid, normal).  Agrees with
/// mesh_volume for a watertight, outward-oriented boundary.
double divergence_volume(const Mesh& mesh);

}  // namespace bctopt
