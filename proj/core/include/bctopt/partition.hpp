#pragma once

#include <vector>

#include "bctopt/mesh.hpp"

namespace bctopt {

/// Assignment of one material label (1-based, in 1..material_count) to
/// every boundary face.
struct BoundaryPartition {
  int material_count = 0;
  std::vector<int> labels;
};

/// Total boundary area per region, indexed by label - 1.
std::vector<double> region_areas(const Mesh& mesh, const BoundaryPartition& partition);

/// Face count per region, indexed by label - 1.
std::vector<int> region_face_counts(const BoundaryPartition& partition);

/// Total area of faces whose labels differ between the two partitions.
double symmetric_difference_area(const Mesh& mesh, const BoundaryPartition& a,
                                 const BoundaryPartition& b);

}  // namespace bctopt
