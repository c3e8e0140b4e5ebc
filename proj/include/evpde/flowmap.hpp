#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evpde/geometry.hpp"

namespace evpde {

enum class Family { Static, TranslatingCircle, ExpandingCircle, OscillatingEllipse };

/// Which measure a Jacobian refers to: length element along the curve or area element of the disk.
enum class MeasureKind { Surface, Bulk };

struct GeometrySample {
  Vec2 position;
  Vec2 velocity;
  Mat2 grad_velocity;
  double jdet = 1.0;
  double div_w_bulk = 0.0;
  double div_w_surface = 0.0;
};

/// Analytic evolving geometry x = Phi(t, x0) over the unit circle / unit disk.
///
/// Every built-in family is affine in space, Phi(t, x0) = F(t) x0 + c(t), so the
/// Eulerian velocity is w(t, x) = F'(t) F(t)^{-1} (x - c(t)) + c'(t) and all
/// derivatives are available in closed form.
///
///   static              F = I,                 c = 0
///   translating_circle  F = I,                 c = (speed t, 0)       param "speed" (1)
///   expanding_circle    F = R(t) I,            R = 1 + gamma t        param "gamma" (0.5)
///   oscillating_ellipse F = diag(a(t), 1),     a = 1 + A sin(2 pi t)  param "amplitude" (0.25)
///
/// The "_disk" ids name the same maps applied to the filled reference disk.
class FlowMap {
 public:
  using Params = std::map<std::string, double>;

  explicit FlowMap(Family family, Params params = {}, double t_end = 1.0);

  /// Accepts canonical ids and the `*_disk` aliases; throws std::invalid_argument
  /// listing the valid ids otherwise.
  static FlowMap from_id(std::string_view id, Params params = {}, double t_end = 1.0);
  static std::vector<std::string> known_ids();

  Family family() const { return family_; }
  std::string id() const;
  double t_end() const { return t_end_; }
  double param(const std::string& name) const;
  const Params& params() const { return params_; }

  Vec2 evaluate(double t, const Vec2& x0) const;
  Vec2 velocity(double t, const Vec2& x) const;

  Mat2 deformation_gradient(double t) const;
  Mat2 velocity_gradient(double t) const;

  /// |dPhi tau0| for `Surface` (x0 on the unit circle), det DPhi for `Bulk`.
  double jacobian_det(double t, const Vec2& x0, MeasureKind kind) const;

  double div_w_bulk(double t) const;
  /// Tangential divergence of w at the material point Phi(t, x0), x0 on the unit circle.
  double div_w_surface(double t, const Vec2& x0) const;

  GeometrySample sample(double t, const Vec2& x0, MeasureKind kind) const;

  /// Classical RK4 on dJ/dt = div(w)(t, Phi(t, x0)) J, J(0) = 1, on the supplied grid.
  std::vector<double> integrate_jacobian_ode(const Vec2& x0, std::span<const double> t_grid,
                                             MeasureKind kind = MeasureKind::Surface) const;

  /// True when w is normal to the evolving curve (no tangential component).
  bool is_normal_velocity() const;

 private:
  void check_time(double t) const;
  Vec2 translation(double t) const;
  Vec2 translation_rate(double t) const;
  Mat2 deformation_rate(double t) const;

  Family family_;
  Params params_;
  double t_end_;
};

/// Normal velocity -psi_t / |grad psi| * grad psi / |grad psi| of the zero level set of psi.
Vec2 normal_velocity_from_levelset(double psi_t, const Vec2& grad_psi);

}  // namespace evpde
