#include "evpde/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>

namespace evpde {

void SchemeConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("scheme: dt must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("scheme: theta must lie in [0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("scheme: solver tolerance must be positive");
}

namespace {

Vector solve(const SparseMatrix& system, std::span<const double> rhs, const SchemeConfig& cfg) {
  const bool symmetric = system.asymmetry() <= 1e-13 * system.max_abs();
  if (cfg.solver == SolverKind::Cg && symmetric) {
    CgOptions options;
    options.tol = cfg.tol;
    options.check_symmetry = false;
    return cg_solve(system, rhs, options);
  }
  return direct_solve(system, rhs);
}

}  // namespace

Vector esfem_step(const SparseMatrix& mass_old, std::span<const double> u_old, const SparseMatrix& mass_new,
                  const SparseMatrix& stiffness_new, std::span<const double> load_new, const SchemeConfig& cfg) {
  cfg.validate();
  const SparseMatrix system = linear_combination(1.0 / cfg.dt, mass_new, 1.0, stiffness_new);
  Vector rhs = spmv(mass_old, u_old);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] / cfg.dt + load_new[i];
  return solve(system, rhs, cfg);
}

Vector esfem_step(const StepSystem& old_system, std::span<const double> u_old, const StepSystem& new_system,
                  const SchemeConfig& cfg) {
  cfg.validate();
  if (cfg.theta == 1.0) {
    return esfem_step(old_system.mass, u_old, new_system.mass, new_system.stiffness, new_system.load, cfg);
  }
  const double th = cfg.theta;
  const SparseMatrix system = linear_combination(1.0 / cfg.dt, new_system.mass, th, new_system.stiffness);
  const Vector m_old = spmv(old_system.mass, u_old);
  const Vector a_old = spmv(old_system.stiffness, u_old);
  Vector rhs(m_old.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = m_old[i] / cfg.dt - (1.0 - th) * a_old[i] + th * new_system.load[i] + (1.0 - th) * old_system.load[i];
  }
  return solve(system, rhs, cfg);
}

double RunResult::max_error_l2() const {
  double worst = 0.0;
  for (const auto& s : series) worst = std::max(worst, s.error_l2);
  return worst;
}

namespace {

bool identical(const SparseMatrix& a, const SparseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a.row_offsets() == b.row_offsets() &&
         a.col_indices() == b.col_indices() && a.values() == b.values();
}

// Implicit Euler with a direct solver, reusing the factorization while the system matrix is unchanged
// (static geometry).
class FactorizedStepper {
 public:
  Vector step(const StepSystem& old_system, std::span<const double> u_old, const StepSystem& new_system,
              const SchemeConfig& cfg) {
    SparseMatrix system = linear_combination(1.0 / cfg.dt, new_system.mass, 1.0, new_system.stiffness);
    if (!factor_ || !identical(system, matrix_)) {
      factor_ = std::make_unique<DirectFactorization>(system);
      matrix_ = std::move(system);
    }
    Vector rhs = spmv(old_system.mass, u_old);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = rhs[i] / cfg.dt + new_system.load[i];
    return factor_->solve(rhs);
  }

 private:
  SparseMatrix matrix_;
  std::unique_ptr<DirectFactorization> factor_;
};

RunSample measure(const DiscreteProblem& problem, const StepSystem& sys, double t, std::span<const double> state) {
  RunSample s;
  s.time = t;
  s.mass = dot(sys.mass_weights, state);
  s.energy = sys.mass.bilinear(state, state);
  s.dirichlet = sys.energy_form.bilinear(state, state);
  s.forcing_sq = sys.forcing_norm_sq;
  s.error_l2 = problem.error_l2(t, state);
  return s;
}

}  // namespace

RunResult run_transient(const DiscreteProblem& problem, const SchemeConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const double t_end = problem.spec().t_end;
  const long steps = std::lround(t_end / cfg.dt);
  if (steps < 1 || std::abs(steps * cfg.dt - t_end) > 1e-9 * t_end) {
    throw std::invalid_argument("run_transient: t_end must be a positive integer multiple of dt");
  }

  RunResult result;
  result.kind = problem.spec().kind;
  result.dt = cfg.dt;
  result.h = problem.mesh_size();

  Vector state = problem.initial_state();
  StepSystem current = problem.assemble(0.0);
  result.series.push_back(measure(problem, current, 0.0, state));
  if (options.keep_snapshots) result.snapshots.push_back(state);
  if (options.on_step) options.on_step(0, 0.0, problem, state);

  const bool reuse = cfg.theta == 1.0 && cfg.solver == SolverKind::Direct;
  FactorizedStepper stepper;
  for (long n = 1; n <= steps; ++n) {
    const double t = n == steps ? t_end : n * cfg.dt;
    Vector previous = state;
    try {
      StepSystem next = problem.assemble(t);
      state = reuse ? stepper.step(current, state, next, cfg) : esfem_step(current, state, next, cfg);
      current = std::move(next);
    } catch (const std::exception&) {
      std::throw_with_nested(StepError("step " + std::to_string(n) + " at t=" + std::to_string(t) + " failed", t));
    }
    result.series.push_back(measure(problem, current, t, state));
    for (std::size_t i = 0; i < previous.size(); ++i) previous[i] = state[i] - previous[i];
    result.series.back().increment_sq = current.mass.bilinear(previous, previous);
    if (options.keep_snapshots) result.snapshots.push_back(state);
    if (options.on_step) options.on_step(static_cast<int>(n), t, problem, state);
  }
  result.final_state = std::move(state);
  return result;
}

RunResult run_transient(const ProblemSpec& spec, const SchemeConfig& cfg, const RunOptions& options) {
  return run_transient(DiscreteProblem(spec), cfg, options);
}

}  // namespace evpde
