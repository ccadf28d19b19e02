#pragma once

#include <span>
#include <string>
#include <vector>

#include "bctopt/levelset.hpp"
#include "bctopt/mesh.hpp"
#include "bctopt/partition.hpp"
#include "bctopt/topo.hpp"

namespace bctopt {

/// Writes the boundary triangulation as a legacy ASCII VTK unstructured
/// grid with per-cell data: region label, level-set components, steering
/// components, adjoint flux, and one derivative field per target label
/// (the cost derivative of relabeling the face toward that label).
/// Numbers carry 17 significant digits.
void export_boundary_snapshot(const std::string& path, const Mesh& mesh,
                              const BoundaryPartition& partition, const LevelSetField& psi,
                              const TopoFields& fields, const std::vector<double>& flux,
                              std::span<const double> alpha);

/// Reads back the region_label cell array of a snapshot (for round-trip
/// verification).
std::vector<int> read_snapshot_labels(const std::string& path);

}  // namespace bctopt
