#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evpde/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Evolving-domain parabolic PDE solver (surface, bulk, coupled, dynamic boundary)"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a configuration and write functionals.csv (and VTK snapshots)");
  run->add_option("config", config_path, "JSON configuration file")->required();

  std::string only;
  bool mutate = false;
  bool no_budget = false;
  auto* verify = app.add_subcommand("verify", "Run the property suite and print a pass/fail table");
  verify->add_option("--only", only, "Run a single check group");
  verify->add_flag("--mutate-stiffness", mutate, "Flip the sign of the diffusion operators (self-test)");
  verify->add_flag("--no-budget", no_budget, "Do not fail checks that exceed their runtime budget");

  auto* list = app.add_subcommand("list-geometries", "List flow map ids and default parameters");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return evpde::cmd_run(config_path, std::cout, std::cerr);
  if (verify->parsed()) return evpde::cmd_verify(only, mutate, !no_budget, std::cout, std::cerr);
  if (list->parsed()) return evpde::cmd_list_geometries(std::cout);
  return 0;
}
