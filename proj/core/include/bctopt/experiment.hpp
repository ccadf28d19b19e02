#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bctopt/config.hpp"
#include "bctopt/control.hpp"
#include "bctopt/levelset.hpp"
#include "bctopt/mesh.hpp"
#include "bctopt/partition.hpp"

namespace bctopt {

/// Builds the mesh a MeshSpec describes (generator or MSH import).
Mesh build_mesh(const MeshSpec& spec);

struct ReferenceResult {
  BoundaryPartition partition;
  NodalField u_ref;
};

/// Labels the boundary per the reference spec and solves the state for
/// those labels and the configured control values; the result serves as
/// the tracking target u_ref.
ReferenceResult build_reference(const ExperimentConfig& config, const Mesh& mesh,
                                const ControlProblem& problem);

void write_history_csv(const std::string& path, const std::vector<HistoryRecord>& history);

struct RunSummary {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int outer_iterations = 0;
  int accepted_steps = 0;
  double wall_seconds = 0.0;
  std::string stop_reason;
};

void write_summary(const std::string& path, const RunSummary& summary);

/// Full optimization run: builds mesh, problem and reference, runs the
/// optimizer, and writes history.csv, summary.json, snapshots and the
/// effective config into the output directory.  Returns the process exit
/// status (0 on success) and logs progress to the stream.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Prints vertex/cell counts, volume and surface statistics for the
/// configured mesh.
int print_mesh_info(const ExperimentConfig& config, std::ostream& out);

struct FdCheckStats {
  int samples = 0;
  int sign_agreements = 0;
  double median_relative_error = 0.0;
  double mean_relative_error = 0.0;
};

/// Compares the closed-form topological derivative against finite
/// differences on randomly sampled boundary faces of the initial design.
FdCheckStats run_fd_check(const ExperimentConfig& config, int face_count, unsigned seed,
                          std::ostream& log);

}  // namespace bctopt
