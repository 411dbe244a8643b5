#pragma once

// Cross-checks shared by `latcas validate` and the acceptance suite.

#include <functional>
#include <string>
#include <vector>

namespace latcas::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Test hook: corrupts one stage so that the checks depending on it fail.
/// Known values: "" (none), "assembly", "curl", "schur".
void set_fault(const std::string& fault);
const std::string& fault();

CheckResult check_nonzero_counts(int trials = 20);
CheckResult check_adjoint_and_gauge();
CheckResult check_operator_symmetry();
CheckResult check_sparse_vs_dense(int trials = 20);
CheckResult check_schur_identity(int trials = 20);
CheckResult check_three_level_family();
/// D_A and D_G pair energies on an L x L box with ng nodes; passes below `tol`.
CheckResult check_formulation_equivalence(long L, int ng, double tol);

/// The validate suite in order.
std::vector<std::function<CheckResult()>> validation_suite();

/// Runs a check, timing it and turning exceptions into failures.
CheckResult run_check(const std::string& name, const std::function<CheckResult()>& f);

}  // namespace latcas::cli
