#include "evpde/flowmap.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evpde/errors.hpp"

namespace evpde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct IdEntry {
  const char* id;
  Family family;
};

constexpr IdEntry kIds[] = {
    {"static", Family::Static},
    {"translating_circle", Family::TranslatingCircle},
    {"expanding_circle", Family::ExpandingCircle},
    {"oscillating_ellipse", Family::OscillatingEllipse},
    {"static_disk", Family::Static},
    {"translating_disk", Family::TranslatingCircle},
    {"expanding_disk", Family::ExpandingCircle},
    {"oscillating_ellipse_disk", Family::OscillatingEllipse},
};

FlowMap::Params with_defaults(Family family, FlowMap::Params params) {
  auto set_default = [&](const char* key, double value) { params.try_emplace(key, value); };
  switch (family) {
    case Family::Static:
      break;
    case Family::TranslatingCircle:
      set_default("speed", 1.0);
      break;
    case Family::ExpandingCircle:
      set_default("gamma", 0.5);
      break;
    case Family::OscillatingEllipse:
      set_default("amplitude", 0.25);
      break;
  }
  return params;
}

}  // namespace

FlowMap::FlowMap(Family family, Params params, double t_end)
    : family_(family), params_(with_defaults(family, std::move(params))), t_end_(t_end) {
  if (!(t_end_ > 0.0) || !std::isfinite(t_end_)) {
    throw std::invalid_argument("flow map: t_end must be positive and finite");
  }
  for (const auto& [key, value] : params_) {
    if (!std::isfinite(value)) throw std::invalid_argument("flow map: parameter '" + key + "' is not finite");
  }
  // Affine families: F(t) is invertible on [0, t_end] iff det F stays positive.
  switch (family_) {
    case Family::ExpandingCircle:
      if (1.0 + param("gamma") * t_end_ <= 0.0) {
        throw GeometryError("expanding_circle: radius 1 + gamma t reaches zero before t_end");
      }
      break;
    case Family::OscillatingEllipse:
      if (std::abs(param("amplitude")) >= 1.0) {
        throw GeometryError("oscillating_ellipse: |amplitude| must be < 1");
      }
      break;
    default:
      break;
  }
}

FlowMap FlowMap::from_id(std::string_view id, Params params, double t_end) {
  for (const auto& entry : kIds) {
    if (id == entry.id) return FlowMap(entry.family, std::move(params), t_end);
  }
  std::string msg = "unknown geometry id '" + std::string(id) + "'; valid ids:";
  for (const auto& name : known_ids()) msg += " " + name;
  throw std::invalid_argument(msg);
}

std::vector<std::string> FlowMap::known_ids() {
  std::vector<std::string> ids;
  for (const auto& entry : kIds) ids.emplace_back(entry.id);
  return ids;
}

std::string FlowMap::id() const {
  for (const auto& entry : kIds) {
    if (entry.family == family_) return entry.id;
  }
  return "unknown";
}

double FlowMap::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::invalid_argument("flow map " + id() + " has no parameter '" + name + "'");
  return it->second;
}

void FlowMap::check_time(double t) const {
  constexpr double slack = 1e-12;
  if (!(t >= -slack && t <= t_end_ * (1.0 + slack) + slack)) {
    throw DomainError("flow map " + id() + ": t=" + std::to_string(t) + " outside [0, " +
                      std::to_string(t_end_) + "]");
  }
}

Mat2 FlowMap::deformation_gradient(double t) const {
  check_time(t);
  switch (family_) {
    case Family::Static:
    case Family::TranslatingCircle:
      return Mat2::Identity();
    case Family::ExpandingCircle:
      return (1.0 + param("gamma") * t) * Mat2::Identity();
    case Family::OscillatingEllipse: {
      Mat2 f = Mat2::Identity();
      f(0, 0) = 1.0 + param("amplitude") * std::sin(kTwoPi * t);
      return f;
    }
  }
  return Mat2::Identity();
}

Mat2 FlowMap::deformation_rate(double t) const {
  switch (family_) {
    case Family::Static:
    case Family::TranslatingCircle:
      return Mat2::Zero();
    case Family::ExpandingCircle:
      return param("gamma") * Mat2::Identity();
    case Family::OscillatingEllipse: {
      Mat2 df = Mat2::Zero();
      df(0, 0) = param("amplitude") * kTwoPi * std::cos(kTwoPi * t);
      return df;
    }
  }
  return Mat2::Zero();
}

Vec2 FlowMap::translation(double t) const {
  if (family_ == Family::TranslatingCircle) return {param("speed") * t, 0.0};
  return Vec2::Zero();
}

Vec2 FlowMap::translation_rate(double /*t*/) const {
  if (family_ == Family::TranslatingCircle) return {param("speed"), 0.0};
  return Vec2::Zero();
}

Vec2 FlowMap::evaluate(double t, const Vec2& x0) const {
  if (t == 0.0) return x0;
  return deformation_gradient(t) * x0 + translation(t);
}

Mat2 FlowMap::velocity_gradient(double t) const {
  return deformation_rate(t) * deformation_gradient(t).inverse();
}

Vec2 FlowMap::velocity(double t, const Vec2& x) const {
  return velocity_gradient(t) * (x - translation(t)) + translation_rate(t);
}

double FlowMap::div_w_bulk(double t) const { return velocity_gradient(t).trace(); }

namespace {

Vec2 reference_tangent(const Vec2& x0) {
  const double r = x0.norm();
  if (r == 0.0) throw DomainError("surface quantities need a point on the reference curve, got the origin");
  return perp(x0) / r;
}

}  // namespace

double FlowMap::div_w_surface(double t, const Vec2& x0) const {
  const Vec2 tangent = (deformation_gradient(t) * reference_tangent(x0)).normalized();
  return tangent.dot(velocity_gradient(t) * tangent);
}

double FlowMap::jacobian_det(double t, const Vec2& x0, MeasureKind kind) const {
  const Mat2 f = deformation_gradient(t);
  const double j = kind == MeasureKind::Bulk ? f.determinant() : (f * reference_tangent(x0)).norm();
  if (!(j > 0.0)) {
    throw GeometryError("flow map " + id() + ": non-positive Jacobian " + std::to_string(j) +
                        " at t=" + std::to_string(t));
  }
  return j;
}

GeometrySample FlowMap::sample(double t, const Vec2& x0, MeasureKind kind) const {
  GeometrySample s;
  s.position = evaluate(t, x0);
  s.velocity = velocity(t, s.position);
  s.grad_velocity = velocity_gradient(t);
  s.jdet = jacobian_det(t, x0, kind);
  s.div_w_bulk = s.grad_velocity.trace();
  s.div_w_surface = kind == MeasureKind::Surface || x0.norm() > 0.0 ? div_w_surface(t, x0) : 0.0;
  return s;
}

std::vector<double> FlowMap::integrate_jacobian_ode(const Vec2& x0, std::span<const double> t_grid,
                                                    MeasureKind kind) const {
  if (t_grid.empty()) return {};
  if (t_grid.front() != 0.0) throw std::invalid_argument("integrate_jacobian_ode: t_grid must start at 0");
  auto rate = [&](double t) { return kind == MeasureKind::Bulk ? div_w_bulk(t) : div_w_surface(t, x0); };

  std::vector<double> j(t_grid.size());
  j[0] = 1.0;
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const double dt = t_grid[k + 1] - t;
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_jacobian_ode: t_grid must be strictly increasing");
    const double jk = j[k];
    const double k1 = rate(t) * jk;
    const double k2 = rate(t + 0.5 * dt) * (jk + 0.5 * dt * k1);
    const double k3 = rate(t + 0.5 * dt) * (jk + 0.5 * dt * k2);
    const double k4 = rate(t + dt) * (jk + dt * k3);
    j[k + 1] = jk + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return j;
}

bool FlowMap::is_normal_velocity() const {
  return family_ == Family::Static || family_ == Family::ExpandingCircle;
}

Vec2 normal_velocity_from_levelset(double psi_t, const Vec2& grad_psi) {
  const double norm = grad_psi.norm();
  if (!(norm > 0.0)) throw SingularLevelSetError("normal velocity: level-set gradient vanishes");
  return (-psi_t / norm) * (grad_psi / norm);
}

}  // namespace evpde
