#pragma once

#include <stdexcept>
#include <string>

#include "bctopt/mesh.hpp"

namespace bctopt {

struct MshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads an ASCII Gmsh MSH 2.2 file.  4-node tetrahedra (type 4) become
/// mesh cells and 3-node triangles (type 2) the boundary triangulation;
/// any other element type is rejected with the offending element id.
/// Triangles must each match a facet of exactly one tetrahedron; when the
/// file carries no triangles the boundary is reconstructed from the tets.
Mesh import_msh(const std::string& path);

/// Writes the mesh as ASCII MSH 2.2 (nodes, tetrahedra, boundary
/// triangles) with full double precision so that a re-import reproduces
/// the vertex and tet arrays exactly.
void export_msh(const Mesh& mesh, const std::string& path);

}  // namespace bctopt
