#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "latcas/linalg/symbolic.hpp"

namespace latcas::linalg {

struct FactorOptions {
  /// Store the supernodal panels of L. Without them only the log-determinant
  /// and the retained-block Schur complement survive the factorization.
  bool keep_factor = true;
  /// Pivots L_jj^2 below this fraction of the largest input diagonal raise a
  /// conditioning warning.
  double warn_ratio = 1e-13;
  /// Label attached to diagnostics (e.g. the frequency node).
  std::string context;
};

/// Supernodal Cholesky factor P A P^T = L L^T of the bulk block.
///
/// When the analysis retains a block Z (ordered last), the bulk block X is
/// factored and the Schur complement S = Z - Y^T X^-1 Y is returned in the
/// caller's retained order instead of being pivoted.
class CholeskyFactor {
 public:
  const SymbolicAnalysis& symbolic() const { return *symbolic_; }
  std::shared_ptr<const SymbolicAnalysis> symbolic_ptr() const { return symbolic_; }

  Index size() const { return symbolic_->n; }
  /// ln det of the factored (bulk) block: 2 sum ln L_jj.
  double logdet() const { return logdet_; }
  /// Permutation used for the factor: perm[new] = old.
  std::span<const Index> permutation() const { return symbolic_->perm; }

  bool has_retained() const { return symbolic_->retained > 0; }
  const Eigen::MatrixXd& schur() const { return schur_; }

  double min_pivot_ratio() const { return min_pivot_ratio_; }
  bool conditioning_warning() const { return min_pivot_ratio_ < warn_ratio_; }

  bool has_factor() const { return !panels_.empty() || symbolic_->bulk() == 0; }
  /// Dense L over the bulk block (permuted numbering); small problems only.
  Eigen::MatrixXd dense_lower() const;
  /// y = L^-1 (P b) restricted to the bulk, b given in original numbering of
  /// the bulk unknowns (entries at retained indices are ignored).
  Eigen::VectorXd forward_solve(std::span<const double> b) const;
  /// Solves A x = b; requires the stored factor and no retained block.
  std::vector<double> solve(std::span<const double> b) const;

 private:
  friend CholeskyFactor factorize(const SparseOperator&, std::shared_ptr<const SymbolicAnalysis>,
                                  const FactorOptions&);
  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  double logdet_ = 0.0;
  double min_pivot_ratio_ = 1.0;
  double warn_ratio_ = 1e-13;
  Eigen::MatrixXd schur_;
  std::vector<Eigen::MatrixXd> panels_;  // (width + rows) x width per supernode
};

/// Factorizes with a fresh analysis (no retained block).
CholeskyFactor factorize(const SparseOperator& a, const FactorOptions& opts = {});
/// Factorizes reusing an analysis of the same pattern.
CholeskyFactor factorize(const SparseOperator& a, std::shared_ptr<const SymbolicAnalysis> sym,
                         const FactorOptions& opts = {});

/// Number of numeric factorizations performed by this process.
Index factorization_count();
void reset_factorization_count();

}  // namespace latcas::linalg
