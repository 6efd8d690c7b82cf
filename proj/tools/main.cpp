#include "swimfem/errors.hpp"
#include "swimfem/simulation.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Finite-element swimmer simulations on moving meshes"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  swimfem::RunOptions opt;
  std::string output_dir = ".";
  std::string resume;
  double t_final = -1.0, dt = -1.0;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--output-dir", output_dir, "Directory for trajectories, snapshots and checkpoints");
  run->add_option("--t-final", t_final, "Override the final time");
  run->add_option("--dt", dt, "Override the time step");
  run->add_option("--resume", resume, "Continue from a checkpoint");
  run->add_flag("--verbose", opt.verbose, "Print one line per step");
  CLI11_PARSE(app, argc, argv);

  try {
    auto scenario = swimfem::parse_scenario(scenario_path);
    opt.output_dir = output_dir;
    if (run->count("--t-final")) opt.t_final = t_final;
    if (run->count("--dt")) opt.dt = dt;
    if (!resume.empty()) opt.resume = resume;
    swimfem::run(std::move(scenario), opt);
  } catch (const swimfem::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const swimfem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
