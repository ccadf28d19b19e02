#include "bctopt/msh_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace bctopt {

namespace {

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw MshError("unexpected end of file");
}

void expect_line(std::istream& in, const std::string& expected) {
  const std::string line = next_content_line(in);
  if (line != expected) throw MshError("expected \"" + expected + "\", got \"" + line + "\"");
}

void skip_section(std::istream& in, const std::string& name) {
  const std::string terminator = "$End" + name;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == terminator) return;
  }
  throw MshError("section $" + name + " is not terminated by " + terminator);
}

}  // namespace

Mesh import_msh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MshError("cannot open \"" + path + "\"");

  expect_line(in, "$MeshFormat");
  {
    std::istringstream header(next_content_line(in));
    std::string version;
    int file_type = -1, data_size = 0;
    header >> version >> file_type >> data_size;
    if (!header) throw MshError("malformed $MeshFormat header");
    if (version != "2.2")
      throw MshError("unsupported MSH version " + version + " (only 2.2 is handled)");
    if (file_type != 0) throw MshError("only ASCII MSH files are handled (file-type 0)");
  }
  expect_line(in, "$EndMeshFormat");

  Mesh mesh;
  std::map<long, int> node_index;
  bool have_nodes = false;
  bool have_elements = false;

  std::string line;
  while (in >> std::ws, std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (line == "$Nodes") {
      std::istringstream count_line(next_content_line(in));
      long count = -1;
      count_line >> count;
      if (!count_line || count < 0) throw MshError("malformed node count");
      mesh.vertices.reserve(count);
      for (long k = 0; k < count; ++k) {
        std::istringstream row(next_content_line(in));
        long id = 0;
        Vec3 p;
        row >> id >> p.x >> p.y >> p.z;
        if (!row) throw MshError("malformed node record " + std::to_string(k + 1));
        if (!node_index.emplace(id, static_cast<int>(mesh.vertices.size())).second)
          throw MshError("duplicate node id " + std::to_string(id));
        mesh.vertices.push_back(p);
      }
      expect_line(in, "$EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      if (!have_nodes) throw MshError("$Elements section precedes $Nodes");
      std::istringstream count_line(next_content_line(in));
      long count = -1;
      count_line >> count;
      if (!count_line || count < 0) throw MshError("malformed element count");
      for (long k = 0; k < count; ++k) {
        std::istringstream row(next_content_line(in));
        long id = 0;
        int type = 0, tag_count = 0;
        row >> id >> type >> tag_count;
        if (!row) throw MshError("malformed element record " + std::to_string(k + 1));
        for (int t = 0; t < tag_count; ++t) {
          long tag;
          row >> tag;
        }
        const int node_count = type == 2 ? 3 : type == 4 ? 4 : 0;
        if (node_count == 0)
          throw MshError("element " + std::to_string(id) + ": unsupported type " +
                         std::to_string(type) + " (only 3-node triangles and 4-node tets)");
        std::array<int, 4> nodes = {0, 0, 0, 0};
        for (int v = 0; v < node_count; ++v) {
          long node_id;
          row >> node_id;
          if (!row) throw MshError("element " + std::to_string(id) + ": truncated node list");
          auto it = node_index.find(node_id);
          if (it == node_index.end())
            throw MshError("element " + std::to_string(id) + " references unknown node " +
                           std::to_string(node_id));
          nodes[v] = it->second;
        }
        if (type == 4) {
          mesh.tets.push_back(nodes);
        } else {
          mesh.boundary_faces.push_back({nodes[0], nodes[1], nodes[2]});
        }
      }
      expect_line(in, "$EndElements");
      have_elements = true;
    } else if (!line.empty() && line.front() == '$') {
      skip_section(in, line.substr(1));
    } else {
      throw MshError("unexpected content outside of sections: \"" + line + "\"");
    }
  }

  if (!have_nodes) throw MshError("file has no $Nodes section");
  if (!have_elements) throw MshError("file has no $Elements section");
  if (mesh.tets.empty()) throw MshError("file contains no tetrahedra");

  try {
    finalize_mesh(mesh);
  } catch (const MeshError& e) {
    throw MshError("\"" + path + "\": " + e.what());
  }
  return mesh;
}

void export_msh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MshError("cannot write \"" + path + "\"");

  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  out << "$Nodes\n" << mesh.vertex_count() << "\n";
  char buf[96];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& p = mesh.vertices[v];
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g\n", v + 1, p.x, p.y, p.z);
    out << buf;
  }
  out << "$EndNodes\n";

  out << "$Elements\n" << mesh.tet_count() + mesh.boundary_face_count() << "\n";
  long id = 1;
  for (const auto& tet : mesh.tets) {
    out << id++ << " 4 2 0 0 " << tet[0] + 1 << ' ' << tet[1] + 1 << ' ' << tet[2] + 1 << ' '
        << tet[3] + 1 << "\n";
  }
  for (const auto& tri : mesh.boundary_faces) {
    out << id++ << " 2 2 0 0 " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << "\n";
  }
  out << "$EndElements\n";
  if (!out) throw MshError("write failure on \"" + path + "\"");
}

}  // namespace bctopt
