#pragma once

#include <functional>
#include <string>
#include <vector>

namespace evpde {

/// One acceptance criterion evaluated by the property suite.
struct CheckResult {
  int criterion = 0;
  std::string group;
  std::string name;
  bool passed = false;
  std::vector<std::string> details;
  double seconds = 0.0;
  double budget_seconds = 0.0;  ///< 0 = unbudgeted
};

struct CheckOptions {
  /// Empty runs every group.
  std::string only;
  /// Flip the sign of every diffusion operator (mutation testing).
  bool mutate_stiffness = false;
  /// Fail checks whose wall time exceeds their budget.
  bool enforce_budgets = true;
};

const std::vector<std::string>& check_groups();

/// Runs the selected groups in fixed order. Throws std::invalid_argument for an unknown group.
std::vector<CheckResult> run_checks(const CheckOptions& options,
                                    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace evpde
