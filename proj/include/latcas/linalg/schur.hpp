#pragma once

// Block elimination of a bulk block X in favour of a retained block Z:
//
//   A = [ X  Y ]      S = Z - Y^T X^-1 Y,      ln det A = ln det X + ln det S.
//       [ Y' Z ]
//
// Configurations that differ only inside Z share X and therefore one sparse
// factorization. A second elimination inside S isolates each placement's
// small block (the level-3 effective matrix) so that a whole family of local
// perturbations is scored with dense work on tiny matrices.

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "latcas/linalg/cholesky.hpp"
#include "latcas/operators.hpp"

namespace latcas::linalg {

/// Partition into bulk X and retained Z (caller order), with optional
/// level-3 subsets given as positions inside Z.
class SchurPlan {
 public:
  SchurPlan(Index n, std::vector<Index> retained, std::vector<std::vector<Index>> subsets = {});

  Index size() const { return n_; }
  const std::vector<Index>& retained() const { return retained_; }
  const std::vector<std::vector<Index>>& subsets() const { return subsets_; }

  bool in_retained(Index i) const { return position(i) >= 0; }
  /// Position of global index i in Z, or -1.
  Index position(Index i) const { return zpos_[static_cast<std::size_t>(i)]; }

  /// Throws ClosureViolation unless every delta row/col lies in Z.
  void check_closure(std::span<const EntryDelta> deltas) const;
  /// Deltas renumbered to Z positions (checks closure).
  std::vector<EntryDelta> to_local(std::span<const EntryDelta> deltas) const;

 private:
  Index n_;
  std::vector<Index> retained_;
  std::vector<std::vector<Index>> subsets_;
  std::vector<Index> zpos_;
};

struct SchurResult {
  CholeskyFactor bulk;  // factor of X
  Eigen::MatrixXd S;    // over Z in plan order
  double logdet_bulk() const { return bulk.logdet(); }
  /// ln det A = ln det X + ln det S.
  double logdet() const;
};

/// Symbolic analysis of A with the plan's retained block ordered last.
std::shared_ptr<const SymbolicAnalysis> analyze(const SparseOperator& a, const SchurPlan& plan);

/// Factor options for the Schur path: the bulk factor is not kept.
inline FactorOptions schur_factor_options() {
  FactorOptions o;
  o.keep_factor = false;
  return o;
}

SchurResult schur_complement(const SparseOperator& a, const SchurPlan& plan,
                             std::shared_ptr<const SymbolicAnalysis> sym = nullptr,
                             FactorOptions opts = schur_factor_options());

/// Reference route: factor X on its own, solve L_X U = P Y by forward
/// substitution and form S = Z - U^T U.
SchurResult schur_complement_explicit(const SparseOperator& a, const SchurPlan& plan);

/// ln det of a dense symmetric positive definite matrix.
double spd_logdet(const Eigen::MatrixXd& m);

/// Deltas of one configuration, in Z positions, confined to `subset`.
struct Perturbation {
  std::vector<Index> subset;
  std::vector<EntryDelta> deltas;
};

/// value(p) = common + relative[p] = ln det(S_vac + Delta_p).
///
/// `common` = ln det S_vac; `relative[p]` = ln det(S3_p + Delta_p) - ln det S3_p
/// where S3_p is the Schur complement of S_vac onto subset p. Differences of
/// values are differences of full log-determinants.
struct LogdetFamily {
  double common = 0.0;
  std::vector<double> relative;
  double value(std::size_t p) const { return common + relative[p]; }
};

LogdetFamily perturbed_logdet_family(const Eigen::MatrixXd& s_vac,
                                     std::span<const Perturbation> perturbations);

}  // namespace latcas::linalg
