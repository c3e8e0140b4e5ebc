#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "evpde/checks.hpp"
#include "evpde/cli.hpp"
#include "evpde/errors.hpp"

namespace evpde {

namespace {

void print_nested(std::ostream& err, const std::exception& e, int depth = 0) {
  fmt::print(err, "{}{}\n", std::string(2 * depth, ' '), e.what());
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(err, inner, depth + 1);
  } catch (...) {
  }
}

}  // namespace

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_config(config_path);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }
  return cmd_run(config, out, err);
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  fs::path dir = config.output_dir;
  if (const char* env = std::getenv("EVPDE_OUT"); env && *env) dir = env;

  try {
    const DiscreteProblem problem(config.problem_spec());
    fs::create_directories(dir);
    RunOptions options;
    if (config.emit_vtk) {
      options.on_step = [&dir](int step, double t, const DiscreteProblem& p, std::span<const double> state) {
        p.write_vtk((dir / fmt::format("step_{:05d}.vtk", step)).string(), t, state);
      };
    }
    const RunResult result = run_transient(problem, config.scheme(), options);

    const fs::path csv_path = dir / "functionals.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    csv << "time,mass,energy,error_l2\n";
    for (const auto& s : result.series) {
      fmt::print(csv, "{:.17g},{:.17g},{:.17g},{:.17g}\n", s.time, s.mass, s.energy, s.error_l2);
    }
    if (!csv) throw std::runtime_error("write failed: " + csv_path.string());
    fmt::print(out, "{}: {} steps, h={:.4g}, dt={:.4g}; wrote {}\n", to_string(config.problem),
               result.series.size() - 1, result.h, result.dt, csv_path.string());
    if (config.data == "manufactured") fmt::print(out, "max L2 error {:.6e}\n", result.max_error_l2());
  } catch (const std::exception& e) {
    fmt::print(err, "error: run failed\n");
    print_nested(err, e, 1);
    return 1;
  }
  return 0;
}

int cmd_verify(const std::string& only, bool mutate_stiffness, bool enforce_budgets, std::ostream& out,
               std::ostream& err) {
  CheckOptions options;
  options.only = only;
  options.mutate_stiffness = mutate_stiffness;
  options.enforce_budgets = enforce_budgets;
  std::vector<CheckResult> results;
  try {
    results = run_checks(options, [&out](const CheckResult& r) {
      fmt::print(out, "{} {:>2} {:<13} {:<36} {:7.2f} s\n", r.passed ? "PASS" : "FAIL", r.criterion, r.group, r.name,
                 r.seconds);
      for (const auto& d : r.details) fmt::print(out, "{:>20}{}\n", "", d);
      out.flush();
    });
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }
  for (const auto& r : results) {
    if (!r.passed) {
      fmt::print(err, "verify: check '{}' failed\n", r.group);
      return 1;
    }
  }
  fmt::print(out, "all {} checks passed\n", results.size());
  return 0;
}

int cmd_list_geometries(std::ostream& out) {
  for (const auto& id : FlowMap::known_ids()) {
    const FlowMap map = FlowMap::from_id(id);
    std::string params;
    for (const auto& [key, value] : map.params()) params += fmt::format(" {}={}", key, value);
    fmt::print(out, "{:<26}{}\n", id, params);
  }
  return 0;
}

}  // namespace evpde
