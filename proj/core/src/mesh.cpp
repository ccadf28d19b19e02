#include "bctopt/mesh.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace bctopt {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

TetGeometry tet_geometry(const Mesh& mesh, const std::array<int, 4>& tet) {
  const Vec3& x0 = mesh.vertices[tet[0]];
  const Vec3 e1 = mesh.vertices[tet[1]] - x0;
  const Vec3 e2 = mesh.vertices[tet[2]] - x0;
  const Vec3 e3 = mesh.vertices[tet[3]] - x0;
  const double det = dot(e1, cross(e2, e3));
  TetGeometry g;
  g.volume = det / 6.0;
  // Rows of the edge-matrix inverse are the barycentric gradients 1..3.
  g.basis_gradients[1] = cross(e2, e3) / det;
  g.basis_gradients[2] = cross(e3, e1) / det;
  g.basis_gradients[3] = cross(e1, e2) / det;
  g.basis_gradients[0] =
      Vec3{} - (g.basis_gradients[1] + g.basis_gradients[2] + g.basis_gradients[3]);
  return g;
}

std::array<int, 3> sorted_triple(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  return t;
}

Vec3 tet_centroid(const Mesh& mesh, int t) {
  const auto& tet = mesh.tets[t];
  return (mesh.vertices[tet[0]] + mesh.vertices[tet[1]] + mesh.vertices[tet[2]] +
          mesh.vertices[tet[3]]) /
         4.0;
}

}  // namespace

FaceGeometry face_geometry(const Mesh& mesh, int face) {
  if (face < 0 || face >= mesh.boundary_face_count())
    throw MeshError("face index " + std::to_string(face) + " out of range");
  const auto& f = mesh.boundary_faces[face];
  const Vec3& a = mesh.vertices[f[0]];
  const Vec3& b = mesh.vertices[f[1]];
  const Vec3& c = mesh.vertices[f[2]];
  const Vec3 twice_area_normal = cross(b - a, c - a);
  const double doubled = norm(twice_area_normal);
  if (doubled <= 0.0)
    throw MeshError("boundary face " + std::to_string(face) + " is degenerate (zero area)");
  FaceGeometry geom;
  geom.area = 0.5 * doubled;
  geom.centroid = (a + b + c) / 3.0;
  geom.normal = twice_area_normal / doubled;
  if (face < static_cast<int>(mesh.face_to_tet.size())) {
    const Vec3 outward = geom.centroid - tet_centroid(mesh, mesh.face_to_tet[face]);
    if (dot(geom.normal, outward) < 0.0) geom.normal = Vec3{} - geom.normal;
  }
  return geom;
}

void finalize_mesh(Mesh& mesh) {
  const int nv = mesh.vertex_count();
  if (nv == 0 || mesh.tets.empty()) throw MeshError("mesh has no vertices or no tets");
  for (int t = 0; t < mesh.tet_count(); ++t)
    for (int k = 0; k < 4; ++k)
      if (mesh.tets[t][k] < 0 || mesh.tets[t][k] >= nv)
        throw MeshError("tet " + std::to_string(t) + " references vertex " +
                        std::to_string(mesh.tets[t][k]) + " out of range");

  // Positive orientation; inverted tets are reordered silently.
  mesh.tet_geometry.resize(mesh.tet_count());
  for (int t = 0; t < mesh.tet_count(); ++t) {
    auto& tet = mesh.tets[t];
    double vol = signed_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                               mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
    if (vol < 0.0) std::swap(tet[2], tet[3]);
    if (vol == 0.0) throw MeshError("tet " + std::to_string(t) + " is degenerate (zero volume)");
    mesh.tet_geometry[t] = tet_geometry(mesh, tet);
  }

  // Facet incidence: boundary facets belong to one tet, interior ones to two.
  static const int facet_local[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  std::map<std::array<int, 3>, std::pair<int, int>> facet_tets;  // key -> (count, one tet)
  for (int t = 0; t < mesh.tet_count(); ++t) {
    for (const auto& loc : facet_local) {
      const std::array<int, 3> key =
          sorted_triple({mesh.tets[t][loc[0]], mesh.tets[t][loc[1]], mesh.tets[t][loc[2]]});
      auto [it, inserted] = facet_tets.try_emplace(key, 0, t);
      it->second.first += 1;
      if (it->second.first > 2)
        throw MeshError("facet (" + std::to_string(key[0]) + ", " + std::to_string(key[1]) +
                        ", " + std::to_string(key[2]) + ") is shared by more than two tets");
      if (!inserted) it->second.second = std::min(it->second.second, t);
    }
  }

  if (mesh.boundary_faces.empty()) {
    for (const auto& [key, info] : facet_tets)
      if (info.first == 1) mesh.boundary_faces.push_back(key);
  } else {
    std::map<std::array<int, 3>, int> seen;
    for (int f = 0; f < mesh.boundary_face_count(); ++f) {
      const std::array<int, 3> key = sorted_triple(mesh.boundary_faces[f]);
      if (++seen[key] > 1)
        throw MeshError("boundary face " + std::to_string(f) + " duplicates another face");
      auto it = facet_tets.find(key);
      if (it == facet_tets.end())
        throw MeshError("boundary face " + std::to_string(f) +
                        " does not match any tetrahedron facet");
      if (it->second.first != 1)
        throw MeshError("boundary face " + std::to_string(f) +
                        " matches an interior facet (shared by two tets)");
    }
    int boundary_facets = 0;
    for (const auto& [key, info] : facet_tets)
      if (info.first == 1) ++boundary_facets;
    if (boundary_facets != mesh.boundary_face_count())
      throw MeshError("boundary triangulation is incomplete: mesh has " +
                      std::to_string(boundary_facets) + " boundary facets but " +
                      std::to_string(mesh.boundary_face_count()) + " triangles were given");
  }

  mesh.face_to_tet.resize(mesh.boundary_face_count());
  for (int f = 0; f < mesh.boundary_face_count(); ++f)
    mesh.face_to_tet[f] = facet_tets.at(sorted_triple(mesh.boundary_faces[f])).second;

  // Outward orientation of the stored triangles.
  for (int f = 0; f < mesh.boundary_face_count(); ++f) {
    auto& tri = mesh.boundary_faces[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3 n = cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a);
    const Vec3 centroid = (a + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    if (dot(n, centroid - tet_centroid(mesh, mesh.face_to_tet[f])) < 0.0)
      std::swap(tri[1], tri[2]);
  }

  // Watertightness: every boundary edge is shared by exactly two faces.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.boundary_faces) {
    for (int k = 0; k < 3; ++k) {
      const int u = tri[k];
      const int v = tri[(k + 1) % 3];
      edge_count[{std::min(u, v), std::max(u, v)}] += 1;
    }
  }
  for (const auto& [edge, count] : edge_count)
    if (count != 2)
      throw MeshError("boundary is not watertight: edge (" + std::to_string(edge.first) + ", " +
                      std::to_string(edge.second) + ") lies on " + std::to_string(count) +
                      " faces");

  mesh.boundary_vertex_flags.assign(nv, 0);
  for (const auto& tri : mesh.boundary_faces)
    for (int v : tri) mesh.boundary_vertex_flags[v] = 1;

  mesh.face_data.resize(mesh.boundary_face_count());
  for (int f = 0; f < mesh.boundary_face_count(); ++f) mesh.face_data[f] = face_geometry(mesh, f);
}

Mesh generate_ellipsoid_mesh(double a1, double a2, double a3, int n) {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !(a3 > 0.0))
    throw MeshError("ellipsoid semi-axes must be positive");
  if (n < 2) throw MeshError("subdivision count must be at least 2, got " + std::to_string(n));

  const int m = n + 1;
  auto vid = [m](int i, int j, int k) { return (i * m + j) * m + k; };

  Mesh mesh;
  mesh.vertices.resize(static_cast<std::size_t>(m) * m * m);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        const Vec3 q{2.0 * i / n - 1.0, 2.0 * j / n - 1.0, 2.0 * k / n - 1.0};
        const double r2 = norm(q);
        const Vec3 p = r2 > 0.0 ? q * (norm_inf(q) / r2) : Vec3{};
        mesh.vertices[vid(i, j, k)] = {a1 * p.x, a2 * p.y, a3 * p.z};
      }
    }
  }

  // Six tets per cell along a diagonal (one per axis permutation). The cell
  // diagonal is mirrored along each axis whose cell index is odd, and always
  // in the last layer (for odd n that layer would otherwise repeat the first
  // layer's orientation). The diagonal a cell places on a face depends only
  // on the other two axes' flags, so any per-index flag choice keeps shared
  // faces matching. Mirroring the outermost layers this way keeps corner
  // tets from having all four vertices on the surface, which would otherwise
  // leave surface patches invisible to any vertex-based field that vanishes
  // on the boundary.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  mesh.tets.reserve(static_cast<std::size_t>(n) * n * n * 6);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int base[3] = {i, j, k};
        const auto flag = [n](int idx) { return idx == n - 1 || (idx & 1) != 0; };
        const bool mirror[3] = {flag(i), flag(j), flag(k)};
        auto corner_vid = [&](const std::array<int, 3>& v) {
          int g[3];
          for (int axis = 0; axis < 3; ++axis)
            g[axis] = base[axis] + (mirror[axis] ? 1 - v[axis] : v[axis]);
          return vid(g[0], g[1], g[2]);
        };
        for (const auto& perm : perms) {
          std::array<int, 3> v = {0, 0, 0};
          std::array<int, 4> tet;
          tet[0] = corner_vid(v);
          for (int step = 0; step < 3; ++step) {
            v[perm[step]] = 1;
            tet[step + 1] = corner_vid(v);
          }
          mesh.tets.push_back(tet);
        }
      }
    }
  }

  finalize_mesh(mesh);
  return mesh;
}

double mesh_volume(const Mesh& mesh) {
  double v = 0.0;
  for (const auto& g : mesh.tet_geometry) v += g.volume;
  return v;
}

double surface_area(const Mesh& mesh) {
  double a = 0.0;
  for (const auto& f : mesh.face_data) a += f.area;
  return a;
}

double divergence_volume(const Mesh& mesh) {
  double v = 0.0;
  for (const auto& f : mesh.face_data) v += f.area * dot(f.centroid, f.normal) / 3.0;
  return v;
}

}  // namespace bctopt
