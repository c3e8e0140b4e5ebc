#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "evpde/fem.hpp"
#include "evpde/flowmap.hpp"
#include "evpde/linalg.hpp"
#include "evpde/mesh.hpp"

namespace evpde {

enum class ProblemKind { SurfaceHeat, Bulk, CoupledBulkSurface, DynamicBoundary };

std::string to_string(ProblemKind kind);
/// Throws std::invalid_argument listing the valid names.
ProblemKind problem_kind_from_string(std::string_view name);

using SpaceTimeFunction = std::function<double(double t, const Vec2& x)>;
using SpaceTimeVector = std::function<Vec2(double t, const Vec2& x)>;

/// Physical material velocity b of the bulk equation. When absent, b = w.
struct MaterialVelocity {
  SpaceTimeVector field;
  SpaceTimeFunction divergence;
};

/// Declarative description of one of the four model problems.
///
/// `initial`/`exact` refer to the primary unknown: u on the curve (surface heat,
/// dynamic boundary) or u in the bulk. `surface_*` carry v and g of the coupled
/// problem. Empty callables mean zero data / no manufactured solution.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::SurfaceHeat;
  FlowMap flowmap{Family::Static};
  double diffusion = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<MaterialVelocity> material_velocity;

  SpaceTimeFunction forcing;
  SpaceTimeFunction surface_forcing;
  SpaceTimeFunction initial;
  SpaceTimeFunction surface_initial;
  SpaceTimeFunction exact;
  SpaceTimeFunction surface_exact;

  int n_segments = 64;     ///< surface heat resolution
  double h_target = 0.1;   ///< disk resolution for the other kinds
  double t_end = 1.0;

  /// Multiplies every diffusion operator; -1 deliberately breaks the scheme (mutation checks).
  double stiffness_sign = 1.0;

  void validate() const;
};

/// Matrices of (M U)' + A U = F on one snapshot.
struct StepSystem {
  SparseMatrix mass;
  SparseMatrix stiffness;
  Vector load;
  /// Symmetric, nonnegative part of the operator used for energy bookkeeping.
  SparseMatrix energy_form;
  /// w_i = integral of basis function i (block-weighted); mass = w^T U.
  Vector mass_weights;
  /// ||f||^2 in the pivot space (block-weighted for the coupled problem).
  double forcing_norm_sq = 0.0;
};

/// A = stiffness; the lambda term rides in the moving mass. F = M f.
StepSystem surface_heat_system(const ProblemSpec& spec, const SurfaceMesh& mesh, double t);

/// Interior unknowns only (u = 0 on the boundary). A = D S + advection(p = b - w,
/// c = div b - div w); the div w part is supplied by the moving mass.
StepSystem bulk_system(const ProblemSpec& spec, const BulkMesh& mesh, double t);

/// Unknowns (u on all bulk nodes, v on surface nodes). M = diag(alpha M_O, beta M_G),
/// A = [[alpha S_O + alpha^2 B, -alpha beta C^T], [-alpha beta C, beta S_G + beta^2 M_G]],
/// F = (alpha M_O f, beta M_G g).
StepSystem coupled_system(const ProblemSpec& spec, const BulkMesh& bulk, const SurfaceMesh& surf, double t);

/// Discrete Dirichlet-to-Neumann map: S_GG - S_GI S_II^{-1} S_IG of the bulk
/// stiffness, dense on boundary nodes in boundary_node_ids order.
Eigen::MatrixXd steklov_operator(const BulkMesh& mesh);

/// Discrete harmonic extension of boundary data (boundary_node_ids order) to all nodes.
Vector harmonic_extension(const BulkMesh& mesh, std::span<const double> boundary_values);

/// Reuses Steklov operators across snapshots whose bulk stiffness matrices agree
/// to 1e-12 relative (for instance under pure dilation). Safe for concurrent use.
class SteklovCache {
 public:
  Eigen::MatrixXd get(const BulkMesh& mesh);
  std::size_t computed() const;

 private:
  struct Entry {
    SparseMatrix stiffness;
    std::vector<int> boundary;
    Eigen::MatrixXd steklov;
  };
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  std::size_t computed_ = 0;
};

/// Boundary unknowns. A = Steklov + M_G - Lambda_G (the last term cancels the
/// lambda contribution of the moving mass, which the equation does not carry).
StepSystem dynamic_boundary_system(const ProblemSpec& spec, const BulkMesh& mesh, double t,
                                   SteklovCache* cache = nullptr);

/// A problem bound to its reference mesh(es); produces snapshots and systems at any t.
class DiscreteProblem {
 public:
  explicit DiscreteProblem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  std::size_t num_unknowns() const;
  /// Mesh size of the reference snapshot.
  double mesh_size() const;

  Vector initial_state() const;
  StepSystem assemble(double t) const;

  /// L2 error against the manufactured solution on the snapshot at t; NaN when none.
  /// Coupled problems report sqrt(e_u^2 + e_v^2).
  double error_l2(double t, std::span<const double> state) const;

  /// Nodal interpolant of the manufactured solution in the unknown layout; empty when none.
  Vector interpolate_exact(double t) const;

  /// Writes the snapshot at t with the state as point data.
  void write_vtk(const std::string& path, double t, std::span<const double> state) const;

  const SurfaceMesh& reference_surface() const { return surface_; }
  const BulkMesh& reference_bulk() const { return bulk_; }

 private:
  Vector expand_interior(std::span<const double> interior) const;

  ProblemSpec spec_;
  SurfaceMesh surface_;
  BulkMesh bulk_;
  std::vector<int> interior_ids_;
  std::shared_ptr<SteklovCache> steklov_cache_;
};

/// Built-in manufactured cases with closed-form forcing. Geometry must be
/// `static` or `expanding_circle` (radial scaling R(t)).
namespace manufactured {

/// u = exp(-t) x1 x2 / R^2 on the circle of radius R(t); f = (-1 + 4/R^2 + R'/R) u.
ProblemSpec surface_heat(const FlowMap& map, int n_segments, double t_end);

/// u = exp(-t) (1 - |x|^2 / R^2), b = w, D given;
/// f = (-1 + 2 R'/R) u + 4 D exp(-t) / R^2 on the disk of radius R(t) (div w = 2R'/R).
ProblemSpec bulk(const FlowMap& map, double h_target, double t_end, double diffusion = 1.0);

/// u = exp(-t) (x1/R)^2 in the bulk, v = exp(-t) (x1/R)^2 (2/R + alpha) / beta on the
/// boundary (so that the Robin condition holds); f, g from the strong forms.
ProblemSpec coupled(const FlowMap& map, double h_target, double t_end, double alpha, double beta);

/// v = exp(-t) (r/R)^k cos(k theta) harmonic, u = v on the boundary;
/// f = u' + dv/dnu + u = (k/R) exp(-t) cos(k theta).
ProblemSpec dynamic_boundary(const FlowMap& map, double h_target, double t_end, int mode = 2);

}  // namespace manufactured

}  // namespace evpde
