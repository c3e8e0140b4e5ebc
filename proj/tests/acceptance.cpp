// Runs every acceptance criterion with runtime budgets enforced and prints one
// line per criterion. Exit status is nonzero if any criterion fails.
#include <cstdio>
#include <exception>

#include <fmt/core.h>

#include "evpde/checks.hpp"

int main() {
  evpde::CheckOptions options;
  options.enforce_budgets = true;
  int failed = 0;
  try {
    const auto results = evpde::run_checks(options, [&failed](const evpde::CheckResult& r) {
      if (!r.passed) ++failed;
      const std::string budget = r.budget_seconds > 0.0 ? fmt::format(", budget {:.0f} s", r.budget_seconds) : "";
      fmt::print("[{}] criterion {} {}: {} ({:.2f} s{})\n", r.passed ? "PASS" : "FAIL", r.criterion, r.group, r.name,
                 r.seconds, budget);
      for (const auto& d : r.details) fmt::print("         {}\n", d);
      std::fflush(stdout);
    });
    fmt::print("{} of {} criteria passed\n", results.size() - failed, results.size());
  } catch (const std::exception& e) {
    fmt::print(stderr, "acceptance: {}\n", e.what());
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
