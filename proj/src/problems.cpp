#include "evpde/problems.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "evpde/errors.hpp"

namespace evpde {

namespace {

constexpr const char* kKindNames[] = {"surface_heat", "bulk", "coupled_bulk_surface", "dynamic_boundary"};

double eval_or_zero(const SpaceTimeFunction& fn, double t, const Vec2& x) { return fn ? fn(t, x) : 0.0; }

Vector sample(const SpaceTimeFunction& fn, double t, std::span<const Vec2> nodes) {
  Vector values(nodes.size(), 0.0);
  if (!fn) return values;
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = fn(t, nodes[i]);
  return values;
}

Vector row_sums(const SparseMatrix& m) {
  Vector ones(m.cols(), 1.0);
  return spmv(m, ones);
}

std::vector<int> interior_nodes(const BulkMesh& mesh) {
  std::vector<bool> on_boundary(mesh.num_nodes(), false);
  for (int id : mesh.boundary_node_ids) on_boundary[id] = true;
  std::vector<int> interior;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (!on_boundary[i]) interior.push_back(static_cast<int>(i));
  }
  return interior;
}

// Undo the flow map to recover reference positions of a moved snapshot; all built-in maps are affine.
Vec2 pull_back(const FlowMap& map, double t, const Vec2& x) {
  const Vec2 shift = map.evaluate(t, Vec2::Zero());
  return map.deformation_gradient(t).inverse() * (x - shift);
}

}  // namespace

std::string to_string(ProblemKind kind) { return kKindNames[static_cast<int>(kind)]; }

ProblemKind problem_kind_from_string(std::string_view name) {
  for (int k = 0; k < 4; ++k) {
    if (name == kKindNames[k]) return static_cast<ProblemKind>(k);
  }
  throw std::invalid_argument("unknown problem kind '" + std::string(name) +
                              "'; valid kinds: surface_heat bulk coupled_bulk_surface dynamic_boundary");
}

void ProblemSpec::validate() const {
  if (!(t_end > 0.0)) throw std::invalid_argument("problem: t_end must be positive");
  if (t_end > flowmap.t_end() * (1.0 + 1e-12)) {
    throw std::invalid_argument("problem: t_end exceeds the flow map horizon");
  }
  if (kind == ProblemKind::SurfaceHeat) {
    if (n_segments < 3) throw std::invalid_argument("problem: n_segments must be >= 3");
  } else if (!(h_target > 0.0 && h_target < 1.0)) {
    throw std::invalid_argument("problem: h_target must lie in (0, 1)");
  }
  if (kind == ProblemKind::Bulk && !(diffusion > 0.0)) {
    throw std::invalid_argument("problem: diffusion D must be positive");
  }
  if (kind == ProblemKind::CoupledBulkSurface && !(alpha > 0.0 && beta > 0.0)) {
    throw std::invalid_argument("problem: coupled problem needs alpha > 0 and beta > 0");
  }
  if (kind == ProblemKind::DynamicBoundary && !flowmap.is_normal_velocity()) {
    throw std::invalid_argument("problem: dynamic boundary problem needs a purely normal velocity; " +
                                flowmap.id() + " has a tangential component");
  }
}

StepSystem surface_heat_system(const ProblemSpec& spec, const SurfaceMesh& mesh, double t) {
  StepSystem sys;
  sys.mass = assemble_mass(mesh);
  const SparseMatrix stiffness = assemble_stiffness(mesh);
  sys.stiffness = stiffness.scaled(spec.stiffness_sign);
  const Vector f = sample(spec.forcing, t, mesh.nodes);
  sys.load = spmv(sys.mass, f);
  sys.energy_form = stiffness;
  sys.mass_weights = row_sums(sys.mass);
  sys.forcing_norm_sq = dot(f, sys.load);
  return sys;
}

StepSystem bulk_system(const ProblemSpec& spec, const BulkMesh& mesh, double t) {
  const std::size_t n = mesh.num_nodes();
  const SparseMatrix mass = assemble_mass(mesh);
  const SparseMatrix stiffness = assemble_stiffness(mesh).scaled(spec.diffusion);

  std::vector<Vec2> p(n, Vec2::Zero());
  Vector c(n, 0.0);
  if (spec.material_velocity) {
    const double div_w = spec.flowmap.div_w_bulk(t);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& x = mesh.nodes[i];
      p[i] = spec.material_velocity->field(t, x) - spec.flowmap.velocity(t, x);
      c[i] = spec.material_velocity->divergence(t, x) - div_w;
    }
  }
  const SparseMatrix advection = assemble_advection(mesh, p, c);
  const SparseMatrix operator_full = linear_combination(spec.stiffness_sign, stiffness, 1.0, advection);

  const std::vector<int> interior = interior_nodes(mesh);
  const Vector f = sample(spec.forcing, t, mesh.nodes);
  const Vector load_full = spmv(mass, f);
  const Vector weights_full = row_sums(mass);

  StepSystem sys;
  sys.mass = mass.submatrix(interior, interior);
  sys.stiffness = operator_full.submatrix(interior, interior);
  sys.energy_form = stiffness.submatrix(interior, interior);
  sys.load.resize(interior.size());
  sys.mass_weights.resize(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k) {
    sys.load[k] = load_full[interior[k]];
    sys.mass_weights[k] = weights_full[interior[k]];
  }
  sys.forcing_norm_sq = dot(f, load_full);
  return sys;
}

StepSystem coupled_system(const ProblemSpec& spec, const BulkMesh& bulk, const SurfaceMesh& surf, double t) {
  const double a = spec.alpha;
  const double b = spec.beta;
  const std::size_t nb = bulk.num_nodes();
  const std::size_t ns = surf.num_nodes();

  const SparseMatrix mass_bulk = assemble_mass(bulk);
  const SparseMatrix mass_surf = assemble_mass(surf);
  const SparseMatrix stiff_bulk = assemble_stiffness(bulk);
  const SparseMatrix stiff_surf = assemble_stiffness(surf);
  const SparseMatrix boundary_mass = assemble_boundary_mass(bulk);
  const SparseMatrix coupling = assemble_coupling(bulk, surf);
  const SparseMatrix coupling_t = coupling.transpose();

  StepSystem sys;
  TripletBuilder mass(nb + ns, nb + ns);
  mass.add_block(0, 0, mass_bulk, a);
  mass.add_block(nb, nb, mass_surf, b);
  sys.mass = mass.build();

  auto robin_operator = [&](double sign) {
    TripletBuilder op(nb + ns, nb + ns);
    op.add_block(0, 0, stiff_bulk, sign * a);
    op.add_block(0, 0, boundary_mass, a * a);
    op.add_block(0, nb, coupling_t, -a * b);
    op.add_block(nb, 0, coupling, -a * b);
    op.add_block(nb, nb, stiff_surf, sign * b);
    op.add_block(nb, nb, mass_surf, b * b);
    return op.build();
  };
  sys.stiffness = robin_operator(spec.stiffness_sign);
  sys.energy_form = spec.stiffness_sign == 1.0 ? sys.stiffness : robin_operator(1.0);

  const Vector f = sample(spec.forcing, t, bulk.nodes);
  const Vector g = sample(spec.surface_forcing, t, surf.nodes);
  const Vector mf = spmv(mass_bulk, f);
  const Vector mg = spmv(mass_surf, g);
  sys.load.resize(nb + ns);
  for (std::size_t i = 0; i < nb; ++i) sys.load[i] = a * mf[i];
  for (std::size_t i = 0; i < ns; ++i) sys.load[nb + i] = b * mg[i];
  sys.mass_weights = row_sums(sys.mass);
  sys.forcing_norm_sq = a * dot(f, mf) + b * dot(g, mg);
  return sys;
}

Eigen::MatrixXd steklov_operator(const BulkMesh& mesh) {
  const SparseMatrix stiffness = assemble_stiffness(mesh);
  const std::vector<int> interior = interior_nodes(mesh);
  const std::vector<int>& boundary = mesh.boundary_node_ids;

  Eigen::MatrixXd result = stiffness.submatrix(boundary, boundary).to_dense();
  if (interior.empty()) return result;
  const DirectFactorization interior_solver(stiffness.submatrix(interior, interior));
  const Eigen::MatrixXd coupling = stiffness.submatrix(interior, boundary).to_dense();
  const Eigen::MatrixXd extension = interior_solver.solve(coupling);
  result.noalias() -= coupling.transpose() * extension;
  return result;
}

Vector harmonic_extension(const BulkMesh& mesh, std::span<const double> boundary_values) {
  const std::vector<int>& boundary = mesh.boundary_node_ids;
  if (boundary_values.size() != boundary.size()) {
    throw std::invalid_argument("harmonic_extension: expected one value per boundary node");
  }
  const SparseMatrix stiffness = assemble_stiffness(mesh);
  const std::vector<int> interior = interior_nodes(mesh);
  Vector full(mesh.num_nodes(), 0.0);
  for (std::size_t k = 0; k < boundary.size(); ++k) full[boundary[k]] = boundary_values[k];
  if (interior.empty()) return full;

  const Vector rhs = spmv(stiffness.submatrix(interior, boundary), boundary_values);
  Vector neg_rhs(rhs.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) neg_rhs[k] = -rhs[k];
  const Vector inner = direct_solve(stiffness.submatrix(interior, interior), neg_rhs);
  for (std::size_t k = 0; k < interior.size(); ++k) full[interior[k]] = inner[k];
  return full;
}

Eigen::MatrixXd SteklovCache::get(const BulkMesh& mesh) {
  SparseMatrix stiffness = assemble_stiffness(mesh);
  {
    std::lock_guard lock(mutex_);
    for (const auto& entry : entries_) {
      if (entry.boundary != mesh.boundary_node_ids || entry.stiffness.nnz() != stiffness.nnz() ||
          entry.stiffness.col_indices() != stiffness.col_indices()) {
        continue;
      }
      const double scale = entry.stiffness.max_abs();
      bool same = true;
      for (std::size_t k = 0; k < stiffness.nnz() && same; ++k) {
        same = std::abs(entry.stiffness.values()[k] - stiffness.values()[k]) <= 1e-12 * scale;
      }
      if (same) return entry.steklov;
    }
  }
  Eigen::MatrixXd steklov = steklov_operator(mesh);
  std::lock_guard lock(mutex_);
  ++computed_;
  entries_.push_back({std::move(stiffness), mesh.boundary_node_ids, steklov});
  return steklov;
}

std::size_t SteklovCache::computed() const {
  std::lock_guard lock(mutex_);
  return computed_;
}

StepSystem dynamic_boundary_system(const ProblemSpec& spec, const BulkMesh& mesh, double t, SteklovCache* cache) {
  const Eigen::MatrixXd steklov = cache ? cache->get(mesh) : steklov_operator(mesh);
  const SurfaceMesh surf = boundary_surface(mesh);
  const SparseMatrix mass = assemble_mass(surf);

  // The boundary nodes sit on the image of the unit circle; recover their reference positions.
  Vector div_w(surf.num_nodes());
  for (std::size_t i = 0; i < div_w.size(); ++i) {
    div_w[i] = spec.flowmap.div_w_surface(t, pull_back(spec.flowmap, t, surf.nodes[i]));
  }
  const SparseMatrix lambda = assemble_lambda(surf, div_w);

  const SparseMatrix steklov_sparse = SparseMatrix::from_dense(steklov);
  const SparseMatrix energy = linear_combination(1.0, steklov_sparse, 1.0, mass);

  StepSystem sys;
  sys.stiffness = linear_combination(spec.stiffness_sign, steklov_sparse, 1.0,
                                     linear_combination(1.0, mass, -1.0, lambda));
  sys.energy_form = energy;
  sys.mass = mass;
  const Vector f = sample(spec.forcing, t, surf.nodes);
  sys.load = spmv(mass, f);
  sys.mass_weights = row_sums(mass);
  sys.forcing_norm_sq = dot(f, sys.load);
  return sys;
}

DiscreteProblem::DiscreteProblem(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == ProblemKind::SurfaceHeat) {
    surface_ = build_circle_mesh(spec_.n_segments);
  } else {
    bulk_ = build_disk_mesh(spec_.h_target);
    surface_ = boundary_surface(bulk_);
    interior_ids_ = interior_nodes(bulk_);
  }
  if (spec_.kind == ProblemKind::DynamicBoundary) steklov_cache_ = std::make_shared<SteklovCache>();
}

std::size_t DiscreteProblem::num_unknowns() const {
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
    case ProblemKind::DynamicBoundary:
      return surface_.num_nodes();
    case ProblemKind::Bulk:
      return interior_ids_.size();
    case ProblemKind::CoupledBulkSurface:
      return bulk_.num_nodes() + surface_.num_nodes();
  }
  return 0;
}

double DiscreteProblem::mesh_size() const {
  return spec_.kind == ProblemKind::SurfaceHeat ? evpde::mesh_size(surface_) : evpde::mesh_size(bulk_);
}

Vector DiscreteProblem::initial_state() const {
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
    case ProblemKind::DynamicBoundary:
      return sample(spec_.initial, 0.0, surface_.nodes);
    case ProblemKind::Bulk: {
      Vector u(interior_ids_.size());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = eval_or_zero(spec_.initial, 0.0, bulk_.nodes[interior_ids_[k]]);
      return u;
    }
    case ProblemKind::CoupledBulkSurface: {
      Vector state = sample(spec_.initial, 0.0, bulk_.nodes);
      const Vector v = sample(spec_.surface_initial, 0.0, surface_.nodes);
      state.insert(state.end(), v.begin(), v.end());
      return state;
    }
  }
  return {};
}

StepSystem DiscreteProblem::assemble(double t) const {
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
      return surface_heat_system(spec_, move_mesh(surface_, spec_.flowmap, t), t);
    case ProblemKind::Bulk:
      return bulk_system(spec_, move_mesh(bulk_, spec_.flowmap, t), t);
    case ProblemKind::CoupledBulkSurface:
      return coupled_system(spec_, move_mesh(bulk_, spec_.flowmap, t), move_mesh(surface_, spec_.flowmap, t), t);
    case ProblemKind::DynamicBoundary:
      return dynamic_boundary_system(spec_, move_mesh(bulk_, spec_.flowmap, t), t, steklov_cache_.get());
  }
  throw std::logic_error("unreachable problem kind");
}

Vector DiscreteProblem::expand_interior(std::span<const double> interior) const {
  Vector full(bulk_.num_nodes(), 0.0);
  for (std::size_t k = 0; k < interior_ids_.size(); ++k) full[interior_ids_[k]] = interior[k];
  return full;
}

double DiscreteProblem::error_l2(double t, std::span<const double> state) const {
  if (!spec_.exact) return std::numeric_limits<double>::quiet_NaN();
  const auto exact_at = [&](const SpaceTimeFunction& fn) { return [&fn, t](const Vec2& x) { return fn(t, x); }; };
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
    case ProblemKind::DynamicBoundary:
      return l2_error(move_mesh(surface_, spec_.flowmap, t), state, exact_at(spec_.exact));
    case ProblemKind::Bulk:
      return l2_error(move_mesh(bulk_, spec_.flowmap, t), expand_interior(state), exact_at(spec_.exact));
    case ProblemKind::CoupledBulkSurface: {
      const std::size_t nb = bulk_.num_nodes();
      const double eu = l2_error(move_mesh(bulk_, spec_.flowmap, t), state.subspan(0, nb), exact_at(spec_.exact));
      if (!spec_.surface_exact) return eu;
      const double ev =
          l2_error(move_mesh(surface_, spec_.flowmap, t), state.subspan(nb), exact_at(spec_.surface_exact));
      return std::sqrt(eu * eu + ev * ev);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Vector DiscreteProblem::interpolate_exact(double t) const {
  if (!spec_.exact) return {};
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
    case ProblemKind::DynamicBoundary:
      return sample(spec_.exact, t, move_mesh(surface_, spec_.flowmap, t).nodes);
    case ProblemKind::Bulk: {
      const BulkMesh moved = move_mesh(bulk_, spec_.flowmap, t);
      Vector u(interior_ids_.size());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = spec_.exact(t, moved.nodes[interior_ids_[k]]);
      return u;
    }
    case ProblemKind::CoupledBulkSurface: {
      Vector state = sample(spec_.exact, t, move_mesh(bulk_, spec_.flowmap, t).nodes);
      const Vector v = sample(spec_.surface_exact, t, move_mesh(surface_, spec_.flowmap, t).nodes);
      state.insert(state.end(), v.begin(), v.end());
      return state;
    }
  }
  return {};
}

void DiscreteProblem::write_vtk(const std::string& path, double t, std::span<const double> state) const {
  switch (spec_.kind) {
    case ProblemKind::SurfaceHeat:
      evpde::write_vtk(path, move_mesh(surface_, spec_.flowmap, t), {{"u", Vector(state.begin(), state.end())}});
      return;
    case ProblemKind::Bulk:
      evpde::write_vtk(path, move_mesh(bulk_, spec_.flowmap, t), {{"u", expand_interior(state)}});
      return;
    case ProblemKind::CoupledBulkSurface: {
      const std::size_t nb = bulk_.num_nodes();
      Vector v_on_nodes(nb, 0.0);
      for (std::size_t k = 0; k < surface_.num_nodes(); ++k) v_on_nodes[bulk_.boundary_node_ids[k]] = state[nb + k];
      evpde::write_vtk(path, move_mesh(bulk_, spec_.flowmap, t),
                       {{"u", Vector(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(nb))},
                        {"v", std::move(v_on_nodes)}});
      return;
    }
    case ProblemKind::DynamicBoundary: {
      const BulkMesh moved = move_mesh(bulk_, spec_.flowmap, t);
      evpde::write_vtk(path, moved, {{"v", harmonic_extension(moved, state)}});
      return;
    }
  }
}

}  // namespace evpde
