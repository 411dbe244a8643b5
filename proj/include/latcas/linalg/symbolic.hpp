#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "latcas/sparse_operator.hpp"

namespace latcas::linalg {

/// A run of consecutive factor columns sharing one below-diagonal row set.
struct Supernode {
  Index first = 0;         // first column (permuted numbering)
  Index last = 0;          // one past the last column
  std::vector<Index> rows; // sorted below-block rows (permuted numbering)
  Index parent = -1;       // parent supernode, -1 for roots
  Index children = 0;
  Index width() const { return last - first; }
};

/// Ordering and structure of a sparse Cholesky factorization, reusable for
/// every matrix with the same symmetric pattern.
///
/// Bulk unknowns are ordered by approximate minimum degree and postordered;
/// retained unknowns (if any) follow in caller order and are never pivoted.
struct SymbolicAnalysis {
  Index n = 0;
  Index retained = 0;
  std::vector<Index> perm;   // perm[new] = old
  std::vector<Index> iperm;  // iperm[old] = new
  std::vector<Index> etree;  // elimination tree (permuted numbering)
  std::vector<Index> column_counts;
  std::vector<Supernode> supernodes;  // bulk columns only

  // Lower-triangle assembly map in permuted numbering: for column j the
  // entries amap_row[k] (>= j) take values[amap_src[k]] of the input.
  std::vector<Index> amap_ptr;
  std::vector<Index> amap_row;
  std::vector<Index> amap_src;

  // Input pattern, kept to validate reuse.
  std::vector<Index> pattern_col_ptr;
  std::vector<Index> pattern_row_idx;

  Index bulk() const { return n - retained; }
  /// Stored entries of the bulk factor (including supernode padding).
  Index factor_entries() const;
  /// Exact nonzeros of L over bulk columns from column counts.
  Index factor_nonzeros() const;
  double factor_flops() const;
  bool matches(const SparseOperator& a) const;
};

struct AnalysisOptions {
  bool amalgamate = true;
  /// Optional position of every unknown (original numbering). When present
  /// the bulk is ordered by geometric nested dissection instead of minimum
  /// degree.
  std::vector<std::array<double, 3>> positions;
};

std::shared_ptr<const SymbolicAnalysis> analyze(const SparseOperator& a,
                                                std::span<const Index> retained = {},
                                                const AnalysisOptions& opts = {});

/// Analysis with a caller-supplied bulk ordering (old indices, bulk only).
std::shared_ptr<const SymbolicAnalysis> analyze_with_order(const SparseOperator& a,
                                                           std::vector<Index> bulk_order,
                                                           std::span<const Index> retained,
                                                           const AnalysisOptions& opts = {});

/// Elimination tree of the symmetric matrix whose strict upper pattern in
/// column k is upper[k] (permuted numbering).
std::vector<Index> elimination_tree(Index n, std::span<const Index> upper_ptr,
                                    std::span<const Index> upper_idx);
std::vector<Index> postorder(std::span<const Index> parent);

}  // namespace latcas::linalg
