#include "evpde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace evpde {

namespace {

double moved_inner_product(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                           std::span<const double> v0, double t) {
  return assemble_mass(move_mesh(reference, map, t)).bilinear(u0, v0);
}

double moved_lambda(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                    std::span<const double> v0, double t) {
  Vector div_w(reference.num_nodes());
  for (std::size_t i = 0; i < div_w.size(); ++i) div_w[i] = map.div_w_surface(t, reference.nodes[i]);
  return assemble_lambda(move_mesh(reference, map, t), div_w).bilinear(u0, v0);
}

}  // namespace

TransportBalance transport_balance(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                                   std::span<const double> v0, double t, double dt_fd) {
  if (!(dt_fd > 0.0)) throw std::invalid_argument("transport_residual: dt_fd must be positive");
  TransportBalance balance;
  balance.derivative = (moved_inner_product(reference, map, u0, v0, t + dt_fd) -
                        moved_inner_product(reference, map, u0, v0, t - dt_fd)) /
                       (2.0 * dt_fd);
  balance.lambda = moved_lambda(reference, map, u0, v0, t);
  return balance;
}

double transport_residual(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                          std::span<const double> v0, double t, double dt_fd) {
  return std::abs(transport_balance(reference, map, u0, v0, t, dt_fd).residual());
}

double richardson_ratio(double coarse, double medium, double fine) { return (coarse - medium) / (medium - fine); }

double integration_by_parts_check(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                                  std::span<const double> v0, double t_end, int intervals) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw std::invalid_argument("integration_by_parts_check: intervals must be even and >= 2");
  }
  const double step = t_end / intervals;
  double integral = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    integral += weight * moved_lambda(reference, map, u0, v0, k * step);
  }
  integral *= step / 3.0;
  const double change = moved_inner_product(reference, map, u0, v0, t_end) -
                        moved_inner_product(reference, map, u0, v0, 0.0);
  return std::abs(change - integral);
}

double h12_seminorm(const SurfaceMesh& mesh, std::span<const double> u) {
  if (u.size() != mesh.num_nodes()) throw std::invalid_argument("h12_seminorm: one value per node expected");
  const std::size_t n = mesh.segments.size();
  std::vector<Vec2> mid(n);
  Vector value(n);
  Vector length(n);
  for (std::size_t e = 0; e < n; ++e) {
    const auto [a, b] = mesh.segments[e];
    mid[e] = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
    value[e] = 0.5 * (u[a] + u[b]);
    length[e] = mesh.segment_length(e);
  }
  double sum = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t f = 0; f < n; ++f) {
      if (e == f) continue;
      const double diff = value[e] - value[f];
      sum += diff * diff / (mid[e] - mid[f]).squaredNorm() * length[e] * length[f];
    }
  }
  return sum;
}

double h12_seminorm(const SurfaceMesh& mesh, const FeFunction& u) {
  if (u.kind != MeshKind::Surface) throw std::invalid_argument("h12_seminorm: expects a surface function");
  return h12_seminorm(mesh, std::span<const double>(u.values));
}

EocTable convergence_study(const ProblemSpec& spec, const SchemeConfig& cfg, int levels, Refinement mode) {
  if (levels < 3) throw std::invalid_argument("convergence_study: need at least 3 levels");
  if (!spec.exact) throw std::invalid_argument("convergence_study: problem has no manufactured solution");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  EocTable table;
  for (int level = 0; level < levels; ++level) {
    ProblemSpec refined = spec;
    SchemeConfig scheme = cfg;
    if (mode == Refinement::SpaceAndTime) {
      refined.n_segments = spec.n_segments << level;
      refined.h_target = spec.h_target / (1 << level);
      scheme.dt = cfg.dt / std::pow(4.0, level);
    } else {
      scheme.dt = cfg.dt / (1 << level);
    }

    EocRow row;
    try {
      const DiscreteProblem problem(refined);
      const RunResult run = run_transient(problem, scheme);
      row.h = run.h;
      row.dt = scheme.dt;
      row.error_l2 = run.max_error_l2();
      const StepSystem final_system = problem.assemble(refined.t_end);
      Vector diff = problem.interpolate_exact(refined.t_end);
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = run.final_state[i] - diff[i];
      row.error_h1 = std::sqrt(std::max(0.0, final_system.energy_form.bilinear(diff, diff)));
    } catch (const std::exception&) {
      std::throw_with_nested(std::runtime_error("convergence_study: level " + std::to_string(level) + " failed"));
    }
    if (table.rows.empty()) {
      row.eoc_h = nan;
      row.eoc_dt = nan;
    } else {
      const EocRow& prev = table.rows.back();
      const double ratio = prev.error_l2 / row.error_l2;
      row.eoc_h = mode == Refinement::SpaceAndTime ? std::log2(ratio) : nan;
      row.eoc_dt = std::log(ratio) / std::log(prev.dt / row.dt);
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_eoc_csv(std::ostream& os, const EocTable& table) {
  os << "h,dt,error_l2,error_h1,eoc_h,eoc_dt\n";
  for (const auto& r : table.rows) {
    fmt::print(os, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.h, r.dt, r.error_l2, r.error_h1, r.eoc_h,
               r.eoc_dt);
  }
}

EnergySummary energy_report(const RunResult& result) {
  EnergySummary summary;
  if (result.series.empty()) return summary;
  summary.data = result.series.front().energy;
  for (std::size_t n = 0; n < result.series.size(); ++n) {
    const RunSample& s = result.series[n];
    summary.max_l2_sq = std::max(summary.max_l2_sq, s.energy);
    if (n > 0) {
      summary.increments += s.increment_sq;
      summary.dissipation += result.dt * s.dirichlet;
      summary.data += result.dt * s.forcing_sq;
    }
  }
  summary.ratio = summary.data > 0.0 ? (summary.max_l2_sq + summary.increments + summary.dissipation) / summary.data : 0.0;
  return summary;
}

}  // namespace evpde
