#include "bctopt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "bctopt/msh_io.hpp"
#include "bctopt/topo.hpp"
#include "bctopt/vtk_io.hpp"

namespace bctopt {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CgOptions solver_options(const ExperimentConfig& config) {
  CgOptions options;
  options.rel_tol = config.solver_tolerance;
  return options;
}

BoundaryPartition reference_partition(const ExperimentConfig& config, const Mesh& mesh) {
  BoundaryPartition partition;
  partition.material_count = config.material_count;
  partition.labels.resize(mesh.boundary_face_count());

  if (config.reference.preset == "two_material") {
    for (std::size_t f = 0; f < mesh.boundary_faces.size(); ++f) {
      const Vec3 c = mesh.face_data[f].centroid;
      partition.labels[f] = (c.z * c.z + c.y * c.y < 0.1) ? 1 : 2;
    }
    return partition;
  }
  if (config.reference.preset == "three_material") {
    for (std::size_t f = 0; f < mesh.boundary_faces.size(); ++f) {
      const Vec3 c = mesh.face_data[f].centroid;
      if (c.x < 0.0 && c.y < 0.0)
        partition.labels[f] = 1;
      else if (c.x < 0.0 && c.y > 0.0)
        partition.labels[f] = 2;
      else
        partition.labels[f] = 3;
    }
    return partition;
  }

  std::vector<FacePredicate> predicates;
  predicates.reserve(config.reference.region_predicates.size());
  for (const std::string& text : config.reference.region_predicates)
    predicates.push_back(FacePredicate::parse(text));
  for (std::size_t f = 0; f < mesh.boundary_faces.size(); ++f) {
    const Vec3 c = mesh.face_data[f].centroid;
    int label = config.material_count;  // unmatched faces fall into the last region
    for (std::size_t r = 0; r < predicates.size(); ++r) {
      if (predicates[r](c)) {
        label = static_cast<int>(r) + 1;
        break;
      }
    }
    partition.labels[f] = label;
  }
  return partition;
}

}  // namespace

Mesh build_mesh(const MeshSpec& spec) {
  if (spec.source == MeshSpec::Source::Ellipsoid)
    return generate_ellipsoid_mesh(spec.a1, spec.a2, spec.a3, spec.subdivisions);
  return import_msh(spec.path);
}

ReferenceResult build_reference(const ExperimentConfig& config, const Mesh& mesh,
                                const ControlProblem& problem) {
  ReferenceResult result;
  result.partition = reference_partition(config, mesh);
  result.u_ref = problem.solve_state(result.partition, config.alpha);
  return result;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open history file \"" + path + "\" for writing");
  const std::size_t regions = history.empty() ? 0 : history.front().areas.size();
  out << "iteration,cost,kappa,accepted";
  for (std::size_t r = 0; r < regions; ++r) out << ",area_" << r + 1;
  for (std::size_t r = 0; r < regions; ++r) out << ",alpha_" << r + 1;
  out << "\n";
  for (const HistoryRecord& rec : history) {
    out << rec.iteration << "," << fmt(rec.cost) << "," << fmt(rec.kappa) << ","
        << (rec.accepted ? 1 : 0);
    for (double a : rec.areas) out << "," << fmt(a);
    for (double a : rec.alpha) out << "," << fmt(a);
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing history file \"" + path + "\"");
}

void write_summary(const std::string& path, const RunSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open summary file \"" + path + "\" for writing");
  out << "{\n";
  out << "  \"initial_cost\": " << fmt(summary.initial_cost) << ",\n";
  out << "  \"final_cost\": " << fmt(summary.final_cost) << ",\n";
  out << "  \"cost_reduction\": "
      << fmt(summary.initial_cost > 0.0 ? summary.final_cost / summary.initial_cost : 0.0)
      << ",\n";
  out << "  \"outer_iterations\": " << summary.outer_iterations << ",\n";
  out << "  \"accepted_steps\": " << summary.accepted_steps << ",\n";
  out << "  \"wall_seconds\": " << fmt(summary.wall_seconds) << ",\n";
  out << "  \"stop_reason\": \"" << summary.stop_reason << "\"\n";
  out << "}\n";
  if (!out) throw std::runtime_error("failed writing summary file \"" + path + "\"");
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();

  const Mesh mesh = build_mesh(config.mesh);
  log << "mesh: " << mesh.vertex_count() << " vertices, " << mesh.tet_count() << " tets, "
      << mesh.boundary_face_count() << " boundary faces\n";

  ControlProblem problem(mesh, config.source_value, config.lambda, solver_options(config));
  const ReferenceResult reference = build_reference(config, mesh, problem);
  problem.set_reference(reference.u_ref);

  const SectorGeometry geometry = make_sector_geometry(config.material_count);
  ControlValues controls{config.alpha, config.lower, config.upper};

  namespace fs = std::filesystem;
  const fs::path out_dir(config.output_directory);
  fs::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "effective_config.cfg");
    cfg << config.serialize();
  }

  int last_snapshot_steps = -1;
  const auto snapshot_name = [](int accepted_steps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04d.vtk", accepted_steps);
    return std::string(buf);
  };
  const IterationCallback on_iteration = [&](const OptimState& state,
                                             const Sensitivities& sens) {
    log << "iteration " << state.outer_iterations << ": cost " << fmt(state.cost) << ", kappa "
        << fmt(state.kappa) << ", accepted steps " << state.accepted_steps << "\n";
    const bool due = config.snapshot_every > 0 &&
                     state.accepted_steps >= last_snapshot_steps + config.snapshot_every;
    if (last_snapshot_steps < 0 || due) {
      export_boundary_snapshot((out_dir / snapshot_name(state.accepted_steps)).string(), mesh,
                               state.partition, state.psi, sens.fields, sens.flux,
                               config.alpha);
      last_snapshot_steps = state.accepted_steps;
    }
  };

  OptimState final_state = optimize(problem, geometry, controls, config.optimizer, on_iteration);

  {
    const Sensitivities sens = compute_sensitivities(problem, geometry, final_state.partition,
                                                     final_state.alpha, final_state.state);
    export_boundary_snapshot((out_dir / "snapshot_final.vtk").string(), mesh,
                             final_state.partition, final_state.psi, sens.fields, sens.flux,
                             final_state.alpha);
  }

  write_history_csv((out_dir / "history.csv").string(), final_state.history);

  RunSummary summary;
  summary.initial_cost = final_state.history.front().cost;
  summary.final_cost = final_state.cost;
  summary.outer_iterations = final_state.outer_iterations;
  summary.accepted_steps = final_state.accepted_steps;
  summary.stop_reason = final_state.stop_reason;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary((out_dir / "summary.json").string(), summary);

  const double surface = surface_area(mesh);
  const double symdiff = symmetric_difference_area(mesh, final_state.partition,
                                                   reference.partition);
  log << "done: cost " << fmt(summary.initial_cost) << " -> " << fmt(summary.final_cost)
      << " (factor " << fmt(summary.final_cost / summary.initial_cost) << ") in "
      << summary.accepted_steps << " accepted steps, stop reason " << summary.stop_reason
      << "\n";
  log << "mismatch vs reference partition: " << fmt(symdiff) << " ("
      << fmt(100.0 * symdiff / surface) << "% of surface area)\n";
  log << "outputs in " << out_dir.string() << "\n";
  return 0;
}

int print_mesh_info(const ExperimentConfig& config, std::ostream& out) {
  const Mesh mesh = build_mesh(config.mesh);
  double min_vol = std::numeric_limits<double>::infinity();
  double max_vol = 0.0;
  for (const TetGeometry& g : mesh.tet_geometry) {
    min_vol = std::min(min_vol, g.volume);
    max_vol = std::max(max_vol, g.volume);
  }
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    lo.z = std::min(lo.z, v.z);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
    hi.z = std::max(hi.z, v.z);
  }
  const double volume = mesh_volume(mesh);
  const double div_volume = divergence_volume(mesh);
  out << "vertices:           " << mesh.vertex_count() << "\n";
  out << "tetrahedra:         " << mesh.tet_count() << "\n";
  out << "boundary faces:     " << mesh.boundary_face_count() << "\n";
  out << "volume:             " << fmt(volume) << "\n";
  out << "surface area:       " << fmt(surface_area(mesh)) << "\n";
  out << "divergence volume:  " << fmt(div_volume) << " (relative gap "
      << fmt(std::abs(div_volume - volume) / volume) << ")\n";
  out << "tet volume range:   [" << fmt(min_vol) << ", " << fmt(max_vol) << "]\n";
  out << "bounding box:       [" << fmt(lo.x) << ", " << fmt(hi.x) << "] x [" << fmt(lo.y)
      << ", " << fmt(hi.y) << "] x [" << fmt(lo.z) << ", " << fmt(hi.z) << "]\n";
  return 0;
}

FdCheckStats run_fd_check(const ExperimentConfig& config, int face_count, unsigned seed,
                          std::ostream& log) {
  config.validate();
  if (face_count < 1) throw std::invalid_argument("fd-check needs at least one face");

  const Mesh mesh = build_mesh(config.mesh);
  ControlProblem problem(mesh, config.source_value, config.lambda, solver_options(config));
  const ReferenceResult reference = build_reference(config, mesh, problem);
  problem.set_reference(reference.u_ref);

  const SectorGeometry geometry = make_sector_geometry(config.material_count);
  const BoundaryPartition partition =
      partition_from_levelset(geometry, init_levelset(geometry, mesh));

  const NodalField u = problem.solve_state(partition, config.alpha);
  const double base_cost = problem.state_cost(u, config.alpha);
  const NodalField p = problem.solve_adjoint_for(u);
  const std::vector<double> flux = boundary_flux(mesh, p);

  std::mt19937 rng(seed);
  std::vector<int> faces(mesh.boundary_face_count());
  std::iota(faces.begin(), faces.end(), 0);
  std::shuffle(faces.begin(), faces.end(), rng);
  const int samples = std::min<int>(face_count, static_cast<int>(faces.size()));

  std::vector<double> errors;
  int agreements = 0;
  log << "face,from,to,closed_form,finite_difference,relative_error\n";
  for (int s = 0; s < samples; ++s) {
    const int face = faces[static_cast<std::size_t>(s)];
    const int from = partition.labels[static_cast<std::size_t>(face)];
    std::vector<int> targets;
    for (int j = 1; j <= config.material_count; ++j)
      if (j != from &&
          config.alpha[static_cast<std::size_t>(j - 1)] !=
              config.alpha[static_cast<std::size_t>(from - 1)])
        targets.push_back(j);
    if (targets.empty())
      throw std::runtime_error("fd-check has no perturbation target with a distinct control "
                               "value; vary problem.alpha");
    std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
    const int to = targets[pick(rng)];

    const double closed_form =
        topological_derivative_fixed_alpha(from, to, config.alpha,
                                           flux[static_cast<std::size_t>(face)]);
    const double fd = fd_topological_derivative(problem, partition, face, from, to,
                                                config.alpha, base_cost);
    const double rel = std::abs(closed_form - fd) / (std::abs(fd) + 1e-12);
    errors.push_back(rel);
    const bool agree = closed_form * fd > 0.0 ||
                       (std::abs(closed_form) < 1e-14 && std::abs(fd) < 1e-14);
    if (agree) ++agreements;
    log << face << "," << from << "," << to << "," << fmt(closed_form) << "," << fmt(fd) << ","
        << fmt(rel) << "\n";
  }

  FdCheckStats stats;
  stats.samples = samples;
  stats.sign_agreements = agreements;
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median_relative_error =
      (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  stats.mean_relative_error = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                              static_cast<double>(n);
  log << "samples " << stats.samples << ", sign agreement " << stats.sign_agreements << "/"
      << stats.samples << ", median relative error " << fmt(stats.median_relative_error)
      << ", mean relative error " << fmt(stats.mean_relative_error) << "\n";
  return stats;
}

}  // namespace bctopt
