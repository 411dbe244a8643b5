#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "latcas/error.hpp"

namespace latcas {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Real sparse matrix in compressed column form.
///
/// Row indices are sorted within each column, (row, col) pairs are unique and
/// no explicit zeros are stored. When `symmetric()` is set the full pattern
/// (both triangles) is stored and equals its transpose exactly.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(Index rows, Index cols, std::vector<Index> col_ptr, std::vector<Index> row_idx,
                 std::vector<double> values, bool symmetric);

  /// Sums duplicates and drops entries that cancel to exactly zero.
  static SparseOperator from_triplets(Index rows, Index cols, std::vector<Triplet> triplets,
                                      bool symmetric = false);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nonzeros() const { return static_cast<Index>(row_idx_.size()); }
  bool symmetric() const { return symmetric_; }

  std::span<const Index> col_ptr() const { return col_ptr_; }
  std::span<const Index> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values_mut() { return values_; }

  /// Entry lookup by binary search; 0 for structural zeros.
  double at(Index row, Index col) const;

  SparseOperator transpose() const;
  /// Product A * B (CSC times CSC); symmetric flag is not inferred.
  SparseOperator multiply(const SparseOperator& b) const;
  std::vector<double> apply(std::span<const double> x) const;

  /// Same shape, pattern and values (bitwise).
  bool identical(const SparseOperator& o) const;
  /// Explicit transpose comparison.
  bool is_symmetric() const;
  /// Checks sorted rows, no duplicates, no stored zeros, consistent offsets.
  bool well_formed() const;

  /// Coordinate text dump: one "row col value" line per entry, header first.
  void write_coordinates(std::ostream& os) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> col_ptr_{0};
  std::vector<Index> row_idx_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

}  // namespace latcas
