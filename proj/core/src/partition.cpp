#include "bctopt/partition.hpp"

#include <stdexcept>
#include <string>

namespace bctopt {

namespace {

void check_partition(const Mesh& mesh, const BoundaryPartition& partition) {
  if (static_cast<int>(partition.labels.size()) != mesh.boundary_face_count())
    throw std::invalid_argument("partition does not match the mesh boundary");
  for (int f = 0; f < static_cast<int>(partition.labels.size()); ++f)
    if (partition.labels[f] < 1 || partition.labels[f] > partition.material_count)
      throw std::invalid_argument("face " + std::to_string(f) + " has label " +
                                  std::to_string(partition.labels[f]) + " outside 1.." +
                                  std::to_string(partition.material_count));
}

}  // namespace

std::vector<double> region_areas(const Mesh& mesh, const BoundaryPartition& partition) {
  check_partition(mesh, partition);
  std::vector<double> areas(partition.material_count, 0.0);
  for (int f = 0; f < mesh.boundary_face_count(); ++f)
    areas[partition.labels[f] - 1] += mesh.face_data[f].area;
  return areas;
}

std::vector<int> region_face_counts(const BoundaryPartition& partition) {
  std::vector<int> counts(partition.material_count, 0);
  for (int label : partition.labels) {
    if (label < 1 || label > partition.material_count)
      throw std::invalid_argument("label " + std::to_string(label) + " outside 1.." +
                                  std::to_string(partition.material_count));
    counts[label - 1] += 1;
  }
  return counts;
}

double symmetric_difference_area(const Mesh& mesh, const BoundaryPartition& a,
                                 const BoundaryPartition& b) {
  check_partition(mesh, a);
  check_partition(mesh, b);
  double area = 0.0;
  for (int f = 0; f < mesh.boundary_face_count(); ++f)
    if (a.labels[f] != b.labels[f]) area += mesh.face_data[f].area;
  return area;
}

}  // namespace bctopt
