// Command-line driver for the boundary control optimizer.
//
//   bctopt run <config> [--output-dir DIR] [--max-iter N]
//   bctopt mesh-info <config>
//   bctopt fd-check <config> --faces K --seed S

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bctopt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-constant Dirichlet boundary control of the Poisson equation"};
  app.require_subcommand(1);

  std::string run_config;
  std::string output_dir;
  int max_iter = -1;
  CLI::App* run = app.add_subcommand("run", "Run an optimization experiment");
  run->add_option("config", run_config, "Experiment config file")->required();
  run->add_option("--output-dir", output_dir, "Override the configured output directory");
  run->add_option("--max-iter", max_iter, "Override the outer iteration budget");

  std::string info_config;
  CLI::App* info = app.add_subcommand("mesh-info", "Print mesh statistics for a config");
  info->add_option("config", info_config, "Experiment config file")->required();

  std::string fd_config;
  int fd_faces = 20;
  unsigned fd_seed = 0;
  CLI::App* fd = app.add_subcommand(
      "fd-check", "Compare closed-form topological derivatives against finite differences");
  fd->add_option("config", fd_config, "Experiment config file")->required();
  fd->add_option("--faces", fd_faces, "Number of boundary faces to sample");
  fd->add_option("--seed", fd_seed, "Random sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      bctopt::ExperimentConfig config = bctopt::ExperimentConfig::load(run_config);
      if (!output_dir.empty()) config.output_directory = output_dir;
      if (max_iter >= 0) config.optimizer.max_outer_iterations = max_iter;
      config.validate();
      return bctopt::run_experiment(config, std::cout);
    }
    if (info->parsed()) {
      const bctopt::ExperimentConfig config = bctopt::ExperimentConfig::load(info_config);
      return bctopt::print_mesh_info(config, std::cout);
    }
    const bctopt::ExperimentConfig config = bctopt::ExperimentConfig::load(fd_config);
    bctopt::run_fd_check(config, fd_faces, fd_seed, std::cout);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
