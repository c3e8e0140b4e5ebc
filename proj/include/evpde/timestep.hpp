#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evpde/linalg.hpp"
#include "evpde/problems.hpp"

namespace evpde {

enum class SolverKind { Cg, Direct };

struct SchemeConfig {
  double dt = 1e-2;
  /// 1 = implicit Euler (certified); values below 1 are experimental.
  double theta = 1.0;
  SolverKind solver = SolverKind::Direct;
  double tol = 1e-12;

  void validate() const;
};

/// Carries the time of the failing step; the original error is nested.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Implicit Euler on the moving mass: (M_new / dt + A_new) U_new = M_old U_old / dt + F_new.
/// Nonsymmetric systems always go to the direct solver.
Vector esfem_step(const SparseMatrix& mass_old, std::span<const double> u_old, const SparseMatrix& mass_new,
                  const SparseMatrix& stiffness_new, std::span<const double> load_new, const SchemeConfig& cfg);

/// Theta scheme; for theta = 1 identical to the overload above.
Vector esfem_step(const StepSystem& old_system, std::span<const double> u_old, const StepSystem& new_system,
                  const SchemeConfig& cfg);

struct RunSample {
  double time = 0.0;
  double mass = 0.0;         ///< w^T U
  double energy = 0.0;       ///< ||U||^2 in the pivot space, U^T M U
  double dirichlet = 0.0;    ///< U^T A_s U, symmetric part of the operator
  double forcing_sq = 0.0;   ///< ||f||^2 at this time
  double increment_sq = 0.0; ///< ||U^n - U^{n-1}||^2 in the current mass; 0 at t = 0
  double error_l2 = 0.0;     ///< NaN without a manufactured solution
};

struct RunResult {
  ProblemKind kind = ProblemKind::SurfaceHeat;
  double dt = 0.0;
  double h = 0.0;
  std::vector<RunSample> series;
  Vector final_state;
  std::vector<Vector> snapshots;  ///< filled when RunOptions::keep_snapshots

  /// max over time levels of the L2 error.
  double max_error_l2() const;
};

struct RunOptions {
  bool keep_snapshots = false;
  /// Called after the initial state and after every step.
  std::function<void(int step, double t, const DiscreteProblem& problem, std::span<const double> state)> on_step;
};

RunResult run_transient(const DiscreteProblem& problem, const SchemeConfig& cfg, const RunOptions& options = {});
RunResult run_transient(const ProblemSpec& spec, const SchemeConfig& cfg, const RunOptions& options = {});

}  // namespace evpde
