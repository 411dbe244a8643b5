#pragma once

// Dense reference implementations for validation. Nothing here shares code
// with the sparse factorization; operators are rebuilt straight from the
// lattice incidence tables.

#include <vector>

#include "latcas/lattice.hpp"
#include "latcas/materials.hpp"
#include "latcas/operators.hpp"
#include "latcas/quadrature.hpp"
#include "latcas/sparse_operator.hpp"

namespace latcas::oracle {

inline constexpr Index kMaxDimension = 4096;

/// Square dense matrix, row-major, dimension capped at kMaxDimension.
class DenseMatrix {
 public:
  explicit DenseMatrix(Index n);
  static DenseMatrix from_sparse(const SparseOperator& a);

  Index size() const { return n_; }
  double& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(i * n_ + j)]; }
  double operator()(Index i, Index j) const { return data_[static_cast<std::size_t>(i * n_ + j)]; }

  /// Max |a_ij - a_ji| <= tol * max |a_ij|.
  bool is_symmetric(double tol = 1e-13) const;
  std::vector<double> eigenvalues() const;  // ascending

 private:
  Index n_;
  std::vector<double> data_;
};

/// ln det by an in-house dense LDL^T; throws NotPositiveDefinite.
double dense_logdet(const DenseMatrix& a);
double min_eigenvalue(const DenseMatrix& a);

DenseMatrix dense_curl(const Lattice& lat);
DenseMatrix dense_DA(const Lattice& lat, const MaterialMap& map, double omega, double c = 1.0);
DenseMatrix dense_DG(const Lattice& lat, const MaterialMap& map, double omega, double c = 1.0);
DenseMatrix dense_operator(Formulation f, const Lattice& lat, const MaterialMap& map,
                           double omega, double c = 1.0);

/// Full ln det differences per node, integrated with the quadrature weights.
double dense_free_energy_difference(const MaterialMap& cfg1, const MaterialMap& cfg2,
                                    const FrequencyGrid& grid,
                                    Formulation f = Formulation::magnetic, double c = 1.0);

}  // namespace latcas::oracle
