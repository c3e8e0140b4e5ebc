#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evpde/cli.hpp"
#include "evpde/errors.hpp"

namespace evpde {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {"problem", "geometry", "geometry_params", "n", "h", "dt", "T_end", "D",
                                     "alpha", "beta", "advection", "data", "solver", "output_dir", "emit_vtk"};

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError("config: " + key + ": " + message, key);
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

bool manufactured_geometry(Family family) { return family == Family::Static || family == Family::ExpandingCircle; }

}  // namespace

ProblemSpec RunConfig::problem_spec() const {
  const FlowMap map = FlowMap::from_id(geometry, geometry_params, t_end);
  ProblemSpec spec;
  if (data == "manufactured") {
    switch (problem) {
      case ProblemKind::SurfaceHeat:
        spec = manufactured::surface_heat(map, n, t_end);
        break;
      case ProblemKind::Bulk:
        spec = manufactured::bulk(map, h, t_end, diffusion);
        break;
      case ProblemKind::CoupledBulkSurface:
        spec = manufactured::coupled(map, h, t_end, alpha, beta);
        break;
      case ProblemKind::DynamicBoundary:
        spec = manufactured::dynamic_boundary(map, h, t_end);
        break;
    }
  } else {
    // Smooth bump centred on the reference point (1, 0), no sources.
    spec.kind = problem;
    spec.flowmap = map;
    spec.n_segments = n;
    spec.h_target = h;
    spec.t_end = t_end;
    spec.diffusion = diffusion;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.initial = [](double, const Vec2& x) { return std::exp(-4.0 * (x - Vec2(1.0, 0.0)).squaredNorm()); };
    if (problem == ProblemKind::CoupledBulkSurface) spec.surface_initial = spec.initial;
  }
  if (problem == ProblemKind::Bulk && advection == "none") {
    spec.material_velocity = MaterialVelocity{[](double, const Vec2&) { return Vec2(0.0, 0.0); },
                                              [](double, const Vec2&) { return 0.0; }};
  }
  return spec;
}

SchemeConfig RunConfig::scheme() const {
  SchemeConfig cfg;
  cfg.dt = dt;
  cfg.solver = solver;
  return cfg;
}

RunConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what(), "");
  }
  if (!root.is_object()) throw ConfigError("config: top level must be a JSON object", "");
  for (const auto& [key, value] : root.items()) {
    if (!kKeys.count(key)) fail(key, "unknown key");
  }

  RunConfig cfg;
  if (!root.contains("problem")) fail("problem", "missing required key");
  try {
    cfg.problem = problem_kind_from_string(get_string(root, "problem", ""));
  } catch (const std::invalid_argument& e) {
    fail("problem", e.what());
  }

  cfg.geometry = get_string(root, "geometry", cfg.geometry);
  if (root.contains("geometry_params")) {
    const json& params = root.at("geometry_params");
    if (!params.is_object()) fail("geometry_params", "expected an object");
    for (const auto& [key, value] : params.items()) {
      cfg.geometry_params[key] = get_number(params, key, 0.0);
    }
  }

  const double n = get_number(root, "n", cfg.n);
  if (n != std::floor(n) || n < 3) fail("n", "must be an integer >= 3");
  cfg.n = static_cast<int>(n);
  cfg.h = get_number(root, "h", cfg.h);
  if (!(cfg.h > 0.0 && cfg.h < 1.0)) fail("h", "must lie in (0, 1)");
  cfg.dt = get_number(root, "dt", cfg.dt);
  cfg.t_end = get_number(root, "T_end", cfg.t_end);
  if (!(cfg.t_end > 0.0)) fail("T_end", "must be positive");
  if (!(cfg.dt > 0.0 && cfg.dt < cfg.t_end)) fail("dt", "must satisfy 0 < dt < T_end");
  const double steps = std::round(cfg.t_end / cfg.dt);
  if (std::abs(steps * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end) fail("dt", "T_end must be an integer multiple of dt");

  cfg.diffusion = get_number(root, "D", cfg.diffusion);
  if (!(cfg.diffusion > 0.0)) fail("D", "must be positive");
  cfg.alpha = get_number(root, "alpha", cfg.alpha);
  if (cfg.problem == ProblemKind::CoupledBulkSurface && !root.contains("beta")) {
    fail("beta", "missing required key for coupled_bulk_surface");
  }
  cfg.beta = get_number(root, "beta", cfg.beta);
  if (cfg.problem == ProblemKind::CoupledBulkSurface && !(cfg.alpha > 0.0)) fail("alpha", "must be positive");
  if (cfg.problem == ProblemKind::CoupledBulkSurface && !(cfg.beta > 0.0)) fail("beta", "must be positive");

  cfg.advection = get_string(root, "advection", cfg.advection);
  if (cfg.advection != "flow" && cfg.advection != "none") fail("advection", "expected \"flow\" or \"none\"");

  Family family;
  try {
    family = FlowMap::from_id(cfg.geometry, {}, cfg.t_end).family();
  } catch (const std::exception& e) {
    fail("geometry", e.what());
  }
  const FlowMap::Params defaults = FlowMap(family).params();
  for (const auto& [key, value] : cfg.geometry_params) {
    if (!defaults.count(key)) fail("geometry_params." + key, "not a parameter of " + cfg.geometry);
  }
  try {
    FlowMap::from_id(cfg.geometry, cfg.geometry_params, cfg.t_end);
  } catch (const std::exception& e) {
    fail("geometry_params", e.what());
  }
  cfg.data = get_string(root, "data", manufactured_geometry(family) ? "manufactured" : "bump");
  if (cfg.data != "manufactured" && cfg.data != "bump") fail("data", "expected \"manufactured\" or \"bump\"");
  if (cfg.data == "manufactured" && !manufactured_geometry(family)) {
    fail("data", "manufactured solutions need a static or expanding geometry");
  }
  if (cfg.data == "manufactured" && cfg.advection == "none" && cfg.problem == ProblemKind::Bulk) {
    fail("advection", "the manufactured bulk case assumes advection \"flow\"");
  }

  const std::string solver = get_string(root, "solver", "direct");
  if (solver == "direct") {
    cfg.solver = SolverKind::Direct;
  } else if (solver == "cg") {
    cfg.solver = SolverKind::Cg;
  } else {
    fail("solver", "expected \"direct\" or \"cg\"");
  }

  cfg.output_dir = get_string(root, "output_dir", cfg.output_dir);
  if (root.contains("emit_vtk")) {
    if (!root.at("emit_vtk").is_boolean()) fail("emit_vtk", "expected true or false");
    cfg.emit_vtk = root.at("emit_vtk").get<bool>();
  }

  try {
    cfg.problem_spec().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("problem", e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path, "");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace evpde
