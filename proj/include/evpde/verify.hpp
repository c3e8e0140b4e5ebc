#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evpde/fem.hpp"
#include "evpde/flowmap.hpp"
#include "evpde/mesh.hpp"
#include "evpde/problems.hpp"
#include "evpde/timestep.hpp"

namespace evpde {

/// Both sides of d/dt (u, v)_{L2(Gamma(t))} = lambda(t; u, v) for data transported
/// with the nodes (zero discrete material derivative).
struct TransportBalance {
  double derivative = 0.0;  ///< central difference of U^T M(t) V
  double lambda = 0.0;      ///< U^T Lambda(t) V with the analytic surface divergence
  double residual() const { return derivative - lambda; }
};

TransportBalance transport_balance(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                                   std::span<const double> v0, double t, double dt_fd);

/// |d/dt (u, v) - lambda(t; u, v)|; O(dt_fd^2 + h^2).
double transport_residual(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                          std::span<const double> v0, double t, double dt_fd);

/// (r(d) - r(d/2)) / (r(d/2) - r(d/4)) for a quantity with expansion r0 + c d^p; tends to 2^p.
double richardson_ratio(double coarse, double medium, double fine);

/// |(u, v)(T) - (u, v)(0) - int_0^T lambda dt| with composite Simpson on `intervals` (even) panels.
double integration_by_parts_check(const SurfaceMesh& reference, const FlowMap& map, std::span<const double> u0,
                                  std::span<const double> v0, double t_end, int intervals = 256);

/// Midpoint double sum over ordered segment pairs e != e':
/// sum |u(m_e) - u(m_e')|^2 / |m_e - m_e'|^2 |e| |e'|. An O(h) diagnostic.
double h12_seminorm(const SurfaceMesh& mesh, std::span<const double> u);
double h12_seminorm(const SurfaceMesh& mesh, const FeFunction& u);

enum class Refinement {
  SpaceAndTime,  ///< h -> h/2, dt -> dt/4
  TimeOnly,      ///< h fixed, dt -> dt/2
};

struct EocRow {
  double h = 0.0;
  double dt = 0.0;
  double error_l2 = 0.0;  ///< max over time levels of the L2 error
  double error_h1 = 0.0;  ///< energy-form norm of (U - I_h u) at the final time
  double eoc_h = 0.0;     ///< log2 of the error ratio to the previous row; NaN on the first row
  double eoc_dt = 0.0;    ///< error ratio exponent with respect to dt; NaN on the first row
};

struct EocTable {
  std::vector<EocRow> rows;
};

/// Nested refinements of a manufactured problem. Level k uses n_segments * 2^k
/// (curves) or h_target / 2^k (disks) unless `mode` is TimeOnly.
EocTable convergence_study(const ProblemSpec& spec, const SchemeConfig& cfg, int levels,
                           Refinement mode = Refinement::SpaceAndTime);

void write_eoc_csv(std::ostream& os, const EocTable& table);

/// Discrete energy norm of implicit Euler:
/// max_n ||U^n||^2 + sum ||U^n - U^{n-1}||^2 + sum dt a_s(U^n, U^n).
struct EnergySummary {
  double max_l2_sq = 0.0;
  double increments = 0.0;
  double dissipation = 0.0;
  double data = 0.0;   ///< ||u0||^2 + sum dt ||f||^2
  double ratio = 0.0;  ///< (max_l2_sq + increments + dissipation) / data; 0 for zero data
};

EnergySummary energy_report(const RunResult& result);

}  // namespace evpde
