#include <cmath>
#include <stdexcept>

#include "evpde/problems.hpp"

namespace evpde::manufactured {

namespace {

// Radius R(t) and rate R'(t) of the radially scaled families.
struct Radius {
  double gamma = 0.0;
  double operator()(double t) const { return 1.0 + gamma * t; }
  double rate() const { return gamma; }
};

Radius radial_scaling(const FlowMap& map) {
  switch (map.family()) {
    case Family::Static:
      return {0.0};
    case Family::ExpandingCircle:
      return {map.param("gamma")};
    default:
      throw std::invalid_argument("manufactured cases need a static or expanding_circle geometry, got " + map.id());
  }
}

}  // namespace

ProblemSpec surface_heat(const FlowMap& map, int n_segments, double t_end) {
  const Radius radius = radial_scaling(map);
  ProblemSpec spec;
  spec.kind = ProblemKind::SurfaceHeat;
  spec.flowmap = map;
  spec.n_segments = n_segments;
  spec.t_end = t_end;
  spec.exact = [radius](double t, const Vec2& x) {
    const double r = radius(t);
    return std::exp(-t) * x.x() * x.y() / (r * r);
  };
  spec.initial = spec.exact;
  spec.forcing = [radius](double t, const Vec2& x) {
    const double r = radius(t);
    const double u = std::exp(-t) * x.x() * x.y() / (r * r);
    return (-1.0 + 4.0 / (r * r) + radius.rate() / r) * u;
  };
  return spec;
}

ProblemSpec bulk(const FlowMap& map, double h_target, double t_end, double diffusion) {
  const Radius radius = radial_scaling(map);
  ProblemSpec spec;
  spec.kind = ProblemKind::Bulk;
  spec.flowmap = map;
  spec.h_target = h_target;
  spec.t_end = t_end;
  spec.diffusion = diffusion;
  spec.exact = [radius](double t, const Vec2& x) {
    const double r = radius(t);
    return std::exp(-t) * (1.0 - x.squaredNorm() / (r * r));
  };
  spec.initial = spec.exact;
  spec.forcing = [radius, diffusion](double t, const Vec2& x) {
    const double r = radius(t);
    const double u = std::exp(-t) * (1.0 - x.squaredNorm() / (r * r));
    return (-1.0 + 2.0 * radius.rate() / r) * u + 4.0 * diffusion * std::exp(-t) / (r * r);
  };
  return spec;
}

ProblemSpec coupled(const FlowMap& map, double h_target, double t_end, double alpha, double beta) {
  const Radius radius = radial_scaling(map);
  ProblemSpec spec;
  spec.kind = ProblemKind::CoupledBulkSurface;
  spec.flowmap = map;
  spec.h_target = h_target;
  spec.t_end = t_end;
  spec.alpha = alpha;
  spec.beta = beta;

  spec.exact = [radius](double t, const Vec2& x) {
    const double y1 = x.x() / radius(t);
    return std::exp(-t) * y1 * y1;
  };
  spec.initial = spec.exact;
  spec.forcing = [radius](double t, const Vec2& x) {
    const double r = radius(t);
    const double y1 = x.x() / r;
    const double u = std::exp(-t) * y1 * y1;
    return -u - 2.0 * std::exp(-t) / (r * r) + 2.0 * radius.rate() / r * u;
  };

  // v depends on the angle only: v = kappa(t) cos^2(theta).
  auto kappa = [radius, alpha, beta](double t) { return std::exp(-t) * (2.0 / radius(t) + alpha) / beta; };
  auto cos_sq = [](const Vec2& x) { return x.x() * x.x() / x.squaredNorm(); };
  spec.surface_exact = [kappa, cos_sq](double t, const Vec2& x) { return kappa(t) * cos_sq(x); };
  spec.surface_initial = spec.surface_exact;
  spec.surface_forcing = [radius, kappa, cos_sq, beta](double t, const Vec2& x) {
    const double r = radius(t);
    const double rate = radius.rate();
    const double c2 = cos_sq(x);
    const double cos_2theta = 2.0 * c2 - 1.0;
    const double k = kappa(t);
    const double k_dot = -k - 2.0 * rate * std::exp(-t) / (r * r * beta);
    const double material = k_dot * c2;
    const double laplace_beltrami = -2.0 * k * cos_2theta / (r * r);
    const double divergence = rate / r * k * c2;
    const double normal_flux = 2.0 * std::exp(-t) * c2 / r;
    return material - laplace_beltrami + divergence + normal_flux;
  };
  return spec;
}

ProblemSpec dynamic_boundary(const FlowMap& map, double h_target, double t_end, int mode) {
  const Radius radius = radial_scaling(map);
  ProblemSpec spec;
  spec.kind = ProblemKind::DynamicBoundary;
  spec.flowmap = map;
  spec.h_target = h_target;
  spec.t_end = t_end;
  spec.exact = [mode](double t, const Vec2& x) { return std::exp(-t) * std::cos(mode * std::atan2(x.y(), x.x())); };
  spec.initial = spec.exact;
  spec.forcing = [radius, mode](double t, const Vec2& x) {
    return mode / radius(t) * std::exp(-t) * std::cos(mode * std::atan2(x.y(), x.x()));
  };
  return spec;
}

}  // namespace evpde::manufactured
