#pragma once

#include <iosfwd>
#include <string>

#include "evpde/flowmap.hpp"
#include "evpde/problems.hpp"
#include "evpde/timestep.hpp"

namespace evpde {

/// Contents of a run configuration file.
///
/// JSON keys (all optional except "problem"):
///   problem          surface_heat | bulk | coupled_bulk_surface | dynamic_boundary
///   geometry         flow map id, default "static"          geometry_params  {"gamma": 0.5, ...}
///   n                curve segments (surface_heat), 64      h               disk mesh size, 0.1
///   dt               1e-2                                   T_end           1
///   D, alpha         1                                      beta            required for coupled_bulk_surface
///   advection        "flow" (b = w) | "none" (b = 0), bulk only
///   data             "manufactured" | "bump"; manufactured when the geometry allows it
///   solver           "direct" | "cg"
///   output_dir       "out" (EVPDE_OUT overrides)            emit_vtk        false
struct RunConfig {
  ProblemKind problem = ProblemKind::SurfaceHeat;
  std::string geometry = "static";
  FlowMap::Params geometry_params;
  int n = 64;
  double h = 0.1;
  double dt = 1e-2;
  double t_end = 1.0;
  double diffusion = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::string advection = "flow";
  std::string data;
  SolverKind solver = SolverKind::Direct;
  std::string output_dir = "out";
  bool emit_vtk = false;

  ProblemSpec problem_spec() const;
  SchemeConfig scheme() const;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_config_text(const std::string& json_text);
RunConfig parse_config(const std::string& path);

/// Exit codes: 0 success, 1 run failure, 2 invalid configuration.
int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Exit 0 iff every selected check passes.
int cmd_verify(const std::string& only, bool mutate_stiffness, bool enforce_budgets, std::ostream& out,
               std::ostream& err);

int cmd_list_geometries(std::ostream& out);

}  // namespace evpde
