#include "bctopt/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bctopt {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_scalar_header(std::ostream& out, const std::string& name, const std::string& type) {
  out << "SCALARS " << name << " " << type << " 1\n";
  out << "LOOKUP_TABLE default\n";
}

}  // namespace

void export_boundary_snapshot(const std::string& path, const Mesh& mesh,
                              const BoundaryPartition& partition, const LevelSetField& psi,
                              const TopoFields& fields, const std::vector<double>& flux,
                              std::span<const double> alpha) {
  const std::size_t face_count = mesh.boundary_face_count();
  if (partition.labels.size() != face_count || psi.size() != face_count ||
      fields.derivative_stack.size() != face_count || flux.size() != face_count)
    throw std::invalid_argument("snapshot fields must have one entry per boundary face");
  const int materials = partition.material_count;
  const int dim = materials - 1;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open snapshot file \"" + path + "\" for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "boundary control snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const Vec3& v : mesh.vertices)
    out << fmt(v.x) << " " << fmt(v.y) << " " << fmt(v.z) << "\n";

  out << "CELLS " << face_count << " " << 4 * face_count << "\n";
  for (const auto& face : mesh.boundary_faces)
    out << "3 " << face[0] << " " << face[1] << " " << face[2] << "\n";

  out << "CELL_TYPES " << face_count << "\n";
  for (std::size_t f = 0; f < face_count; ++f) out << "5\n";

  out << "CELL_DATA " << face_count << "\n";

  write_scalar_header(out, "region_label", "int");
  for (std::size_t f = 0; f < face_count; ++f) out << partition.labels[f] << "\n";

  for (int c = 0; c < dim; ++c) {
    write_scalar_header(out, "psi_" + std::to_string(c), "double");
    for (std::size_t f = 0; f < face_count; ++f) out << fmt(psi[f][c]) << "\n";
  }

  for (int c = 0; c < dim; ++c) {
    write_scalar_header(out, "steering_" + std::to_string(c), "double");
    for (std::size_t f = 0; f < face_count; ++f) out << fmt(fields.steering[f][c]) << "\n";
  }

  write_scalar_header(out, "adjoint_flux", "double");
  for (std::size_t f = 0; f < face_count; ++f) out << fmt(flux[f]) << "\n";

  // One field per target label k: the derivative of the cost when the
  // face is relabeled from its current region toward region k.  Zero on
  // faces already labeled k.
  for (int k = 1; k <= materials; ++k) {
    write_scalar_header(out, "derivative_to_" + std::to_string(k), "double");
    for (std::size_t f = 0; f < face_count; ++f) {
      const int label = partition.labels[f];
      double value = 0.0;
      if (label != k) {
        // The stack lists D toward the other labels in ascending order.
        int slot = 0;
        for (int other = 1; other <= materials; ++other) {
          if (other == label) continue;
          if (other == k) break;
          ++slot;
        }
        value = fields.derivative_stack[f][slot];
      }
      out << fmt(value) << "\n";
    }
  }

  write_scalar_header(out, "control_value", "double");
  for (std::size_t f = 0; f < face_count; ++f) {
    const int label = partition.labels[f];
    out << fmt(alpha[static_cast<std::size_t>(label - 1)]) << "\n";
  }

  if (!out) throw std::runtime_error("failed writing snapshot file \"" + path + "\"");
}

std::vector<int> read_snapshot_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot file \"" + path + "\"");
  std::string line;
  std::size_t cell_count = 0;
  bool have_count = false;
  while (std::getline(in, line)) {
    std::istringstream parts(line);
    std::string word;
    parts >> word;
    if (word == "CELL_DATA") {
      parts >> cell_count;
      have_count = true;
    } else if (word == "SCALARS") {
      std::string name;
      parts >> name;
      if (name == "region_label") {
        if (!have_count)
          throw std::runtime_error("snapshot \"" + path + "\" has SCALARS before CELL_DATA");
        if (!std::getline(in, line))
          throw std::runtime_error("snapshot \"" + path + "\" truncated after SCALARS");
        std::vector<int> labels(cell_count);
        for (std::size_t f = 0; f < cell_count; ++f)
          if (!(in >> labels[f]))
            throw std::runtime_error("snapshot \"" + path + "\" has a truncated label array");
        return labels;
      }
    }
  }
  throw std::runtime_error("snapshot \"" + path + "\" has no region_label array");
}

}  // namespace bctopt
