#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "evpde/fem.hpp"
#include "evpde/mesh.hpp"
#include "evpde/problems.hpp"
#include "evpde/timestep.hpp"
#include "evpde/verify.hpp"

using namespace evpde;

namespace {

constexpr double kPi = std::numbers::pi;

double angle(const Vec2& x) { return std::atan2(x.y(), x.x()); }

Vector sample(const SurfaceMesh& mesh, const PointFunction& fn) { return interpolate(mesh.nodes, fn); }

SchemeConfig implicit_euler(double dt) {
  SchemeConfig cfg;
  cfg.dt = dt;
  return cfg;
}

}  // namespace

TEST(Transport, TranslationHasNoResidual) {
  const SurfaceMesh mesh = build_circle_mesh(64);
  const Vector u = sample(mesh, [](const Vec2& x) { return x.x() + 2.0; });
  const Vector v = sample(mesh, [](const Vec2& x) { return x.y() * x.y(); });
  const FlowMap map(Family::TranslatingCircle);
  EXPECT_LE(transport_residual(mesh, map, u, v, 0.4, 1e-3), 1e-10);
  const TransportBalance balance = transport_balance(mesh, map, u, v, 0.4, 1e-3);
  EXPECT_EQ(balance.lambda, 0.0);
}

TEST(Transport, ExpandingPerimeterRate) {
  const SurfaceMesh mesh = build_circle_mesh(256);
  const Vector ones(256, 1.0);
  const FlowMap map(Family::ExpandingCircle);
  const double t = 0.5;
  EXPECT_LE(transport_residual(mesh, map, ones, ones, t, 1e-4), 1e-6);
  // d/dt of the polygon perimeter 2 n sin(pi / n) R(t).
  const TransportBalance balance = transport_balance(mesh, map, ones, ones, t, 1e-4);
  EXPECT_NEAR(balance.derivative, 2.0 * 256 * std::sin(kPi / 256) * 0.5, 1e-9);
}

TEST(Transport, EllipseResidualIsSecondOrderInStep) {
  const SurfaceMesh mesh = build_circle_mesh(128);
  const Vector u = sample(mesh, [](const Vec2& x) { return x.x(); });
  const Vector v = sample(mesh, [](const Vec2& x) { return x.y(); });
  const FlowMap map(Family::OscillatingEllipse);
  const double t = 0.3;
  const double r1 = transport_residual(mesh, map, u, v, t, 2e-2);
  const double r2 = transport_residual(mesh, map, u, v, t, 1e-2);
  const double r3 = transport_residual(mesh, map, u, v, t, 5e-3);
  EXPECT_NEAR(r1 / r2, 4.0, 0.4) << "residuals " << r1 << ", " << r2;
  EXPECT_NEAR(r2 / r3, 4.0, 0.4) << "residuals " << r2 << ", " << r3;
}

TEST(Transport, EllipseRichardsonRatioForNonSymmetricData) {
  const SurfaceMesh mesh = build_circle_mesh(256);
  const Vector u = sample(mesh, [](const Vec2& x) { return x.x() + 0.5; });
  const Vector v = sample(mesh, [](const Vec2& x) { return x.x() + 0.25 * x.y(); });
  const FlowMap map(Family::OscillatingEllipse);
  auto signed_residual = [&](double d) { return transport_balance(mesh, map, u, v, 0.3, d).residual(); };
  const double ratio = richardson_ratio(signed_residual(2e-2), signed_residual(1e-2), signed_residual(5e-3));
  EXPECT_NEAR(ratio, 4.0, 0.4);
}

TEST(Transport, RichardsonRatioOfExactExpansion) {
  auto r = [](double d) { return 3.0 + 2.0 * d * d; };
  EXPECT_NEAR(richardson_ratio(r(0.4), r(0.2), r(0.1)), 4.0, 1e-12);
}

TEST(IntegrationByParts, StaticGeometry) {
  const SurfaceMesh mesh = build_circle_mesh(40);
  const Vector u = sample(mesh, [](const Vec2& x) { return std::cos(3.0 * angle(x)); });
  EXPECT_LE(integration_by_parts_check(mesh, FlowMap(Family::Static), u, u, 1.0), 1e-12);
}

TEST(IntegrationByParts, ExpandingPerimeter) {
  const SurfaceMesh mesh = build_circle_mesh(64);
  const Vector ones(64, 1.0);
  EXPECT_LE(integration_by_parts_check(mesh, FlowMap(Family::ExpandingCircle), ones, ones, 1.0), 1e-6);
}

TEST(IntegrationByParts, EllipseOverOnePeriod) {
  const SurfaceMesh mesh = build_circle_mesh(64);
  const Vector u = sample(mesh, [](const Vec2& x) { return x.x(); });
  const Vector v = sample(mesh, [](const Vec2& x) { return x.x() + x.y(); });
  EXPECT_LE(integration_by_parts_check(mesh, FlowMap(Family::OscillatingEllipse), u, v, 1.0), 1e-6);
  EXPECT_THROW(integration_by_parts_check(mesh, FlowMap(Family::OscillatingEllipse), u, v, 1.0, 7),
               std::invalid_argument);
}

TEST(H12Seminorm, VanishesOnConstants) {
  const SurfaceMesh mesh = build_circle_mesh(64);
  EXPECT_EQ(h12_seminorm(mesh, Vector(64, 2.5)), 0.0);
}

TEST(H12Seminorm, ShiftInvariantAndQuadratic) {
  const SurfaceMesh mesh = move_mesh(build_circle_mesh(96), FlowMap(Family::OscillatingEllipse), 0.2);
  Vector u(96);
  for (int i = 0; i < 96; ++i) u[i] = std::sin(0.2 * i) + 0.01 * i;
  Vector shifted = u;
  Vector scaled = u;
  for (int i = 0; i < 96; ++i) {
    shifted[i] += 4.0;
    scaled[i] *= -3.0;
  }
  const double base = h12_seminorm(mesh, u);
  EXPECT_GT(base, 0.0);
  EXPECT_NEAR(h12_seminorm(mesh, shifted), base, 1e-12 * base);
  EXPECT_NEAR(h12_seminorm(mesh, scaled), 9.0 * base, 1e-12 * base);
}

TEST(H12Seminorm, CosineSelfConverges) {
  const auto cosine = [](const Vec2& x) { return std::cos(angle(x)); };
  const SurfaceMesh coarse = build_circle_mesh(512);
  const SurfaceMesh fine = build_circle_mesh(1024);
  const double a = h12_seminorm(coarse, FeFunction{sample(coarse, cosine), 0.0, MeshKind::Surface});
  const double b = h12_seminorm(fine, FeFunction{sample(fine, cosine), 0.0, MeshKind::Surface});
  EXPECT_NEAR(a / b, 1.0, 0.02);
}

TEST(H12Seminorm, RejectsBulkFunction) {
  const SurfaceMesh mesh = build_circle_mesh(8);
  EXPECT_THROW(h12_seminorm(mesh, FeFunction{Vector(8, 0.0), 0.0, MeshKind::Bulk}), std::invalid_argument);
}

TEST(ConvergenceStudy, TableShape) {
  const ProblemSpec spec = manufactured::surface_heat(FlowMap(Family::ExpandingCircle), 8, 0.5);
  const EocTable table = convergence_study(spec, implicit_euler(0.1), 3);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_TRUE(std::isnan(table.rows[0].eoc_h));
  EXPECT_TRUE(std::isnan(table.rows[0].eoc_dt));
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_GT(table.rows[k].error_l2, 0.0);
    EXPECT_GT(table.rows[k].error_h1, 0.0);
    EXPECT_TRUE(std::isfinite(table.rows[k].error_l2));
    if (k == 0) continue;
    EXPECT_LT(table.rows[k].h, table.rows[k - 1].h);
    EXPECT_NEAR(table.rows[k].dt, table.rows[k - 1].dt / 4.0, 1e-15);
    EXPECT_LT(table.rows[k].error_l2, table.rows[k - 1].error_l2);
  }
  EXPECT_NEAR(table.rows[2].eoc_h, 2.0, 0.3);
}

TEST(ConvergenceStudy, TimeOnlyKeepsMesh) {
  const ProblemSpec spec = manufactured::surface_heat(FlowMap(Family::ExpandingCircle), 512, 1.0);
  const EocTable table = convergence_study(spec, implicit_euler(0.2), 3, Refinement::TimeOnly);
  for (std::size_t k = 1; k < 3; ++k) {
    EXPECT_EQ(table.rows[k].h, table.rows[0].h);
    EXPECT_NEAR(table.rows[k].dt, table.rows[k - 1].dt / 2.0, 1e-15);
    EXPECT_TRUE(std::isnan(table.rows[k].eoc_h));
  }
  EXPECT_NEAR(table.rows[2].eoc_dt, 1.0, 0.2);
}

TEST(ConvergenceStudy, RejectsBadInput) {
  const ProblemSpec spec = manufactured::surface_heat(FlowMap(Family::Static), 8, 0.5);
  EXPECT_THROW(convergence_study(spec, implicit_euler(0.1), 2), std::invalid_argument);
  ProblemSpec no_exact = spec;
  no_exact.exact = nullptr;
  EXPECT_THROW(convergence_study(no_exact, implicit_euler(0.1), 3), std::invalid_argument);
}

TEST(ConvergenceStudy, FailureNamesLevel) {
  ProblemSpec spec = manufactured::surface_heat(FlowMap(Family::Static), 8, 0.5);
  spec.forcing = [](double, const Vec2&) -> double { throw std::runtime_error("bad forcing"); };
  try {
    convergence_study(spec, implicit_euler(0.1), 3);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("level 0"), std::string::npos) << e.what();
  }
}

TEST(ConvergenceStudy, CsvLayout) {
  EocTable table;
  table.rows.push_back({0.5, 0.1, 0.25, 1.0, std::nan(""), std::nan("")});
  table.rows.push_back({0.25, 0.025, 0.0625, 0.5, 2.0, 1.0});
  std::ostringstream os;
  write_eoc_csv(os, table);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "h,dt,error_l2,error_h1,eoc_h,eoc_dt");
  std::getline(is, line);
  EXPECT_EQ(line, "0.5,0.10000000000000001,0.25,1,nan,nan");
  std::getline(is, line);
  EXPECT_EQ(line, "0.25,0.025000000000000001,0.0625,0.5,2,1");
}

TEST(EnergyReport, ZeroDataGivesZeros) {
  ProblemSpec spec;
  spec.n_segments = 16;
  spec.t_end = 0.5;
  const EnergySummary e = energy_report(run_transient(spec, implicit_euler(0.1)));
  EXPECT_EQ(e.max_l2_sq, 0.0);
  EXPECT_EQ(e.increments, 0.0);
  EXPECT_EQ(e.dissipation, 0.0);
  EXPECT_EQ(e.data, 0.0);
  EXPECT_EQ(e.ratio, 0.0);
}

TEST(EnergyReport, UnforcedSurfaceHeatMaxNormRatio) {
  ProblemSpec spec;
  spec.flowmap = FlowMap(Family::ExpandingCircle);
  spec.n_segments = 64;
  spec.t_end = 1.0;
  spec.initial = [](double, const Vec2& x) { return 1.0 + std::cos(2.0 * angle(x)); };
  for (double dt : {0.1, 0.025}) {
    const EnergySummary e = energy_report(run_transient(spec, implicit_euler(dt)));
    EXPECT_LE(e.max_l2_sq / e.data, 1.0 + dt);
    EXPECT_GT(e.dissipation, 0.0);
    EXPECT_LE(e.ratio, 2.0);
  }
}

TEST(EnergyReport, StaticIdentity) {
  // Static geometry, f = 0: ||U^N||^2 + sum ||dU||^2 + 2 sum dt a(U, U) = ||U^0||^2 exactly.
  ProblemSpec spec;
  spec.n_segments = 48;
  spec.t_end = 1.0;
  spec.initial = [](double, const Vec2& x) { return std::sin(3.0 * angle(x)); };
  const RunResult run = run_transient(spec, implicit_euler(0.05));
  const EnergySummary e = energy_report(run);
  EXPECT_NEAR(run.series.back().energy + e.increments + 2.0 * e.dissipation, run.series.front().energy, 1e-12);
}

TEST(EnergyReport, CoupledUnforcedEnergyNonIncreasing) {
  ProblemSpec spec;
  spec.kind = ProblemKind::CoupledBulkSurface;
  spec.h_target = 0.2;
  spec.t_end = 0.5;
  spec.initial = [](double, const Vec2& x) { return x.x() + 1.0; };
  spec.surface_initial = [](double, const Vec2& x) { return x.y(); };
  const RunResult run = run_transient(spec, implicit_euler(0.05));
  const EnergySummary e = energy_report(run);
  EXPECT_NEAR(e.max_l2_sq, run.series.front().energy, 1e-14);
}
