#include "latcas/sparse_operator.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace latcas {

SparseOperator::SparseOperator(Index rows, Index cols, std::vector<Index> col_ptr,
                               std::vector<Index> row_idx, std::vector<double> values,
                               bool symmetric)
    : rows_(rows),
      cols_(cols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (static_cast<Index>(col_ptr_.size()) != cols_ + 1 || row_idx_.size() != values_.size() ||
      col_ptr_.back() != static_cast<Index>(row_idx_.size())) {
    throw Error("inconsistent compressed column arrays");
  }
  if (symmetric_ && rows_ != cols_) throw Error("symmetric operator must be square");
}

SparseOperator SparseOperator::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets,
                                             bool symmetric) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  std::vector<Index> col_ptr(static_cast<std::size_t>(cols) + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  row_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::size_t k = 0;
  for (Index c = 0; c < cols; ++c) {
    while (k < triplets.size() && triplets[k].col == c) {
      const Index r = triplets[k].row;
      double v = 0.0;
      while (k < triplets.size() && triplets[k].col == c && triplets[k].row == r) {
        v += triplets[k].value;
        ++k;
      }
      if (v != 0.0) {
        row_idx.push_back(r);
        values.push_back(v);
      }
    }
    col_ptr[c + 1] = static_cast<Index>(row_idx.size());
  }
  return SparseOperator(rows, cols, std::move(col_ptr), std::move(row_idx), std::move(values),
                        symmetric);
}

double SparseOperator::at(Index row, Index col) const {
  const auto first = row_idx_.begin() + col_ptr_[col];
  const auto last = row_idx_.begin() + col_ptr_[col + 1];
  const auto it = std::lower_bound(first, last, row);
  if (it == last || *it != row) return 0.0;
  return values_[static_cast<std::size_t>(it - row_idx_.begin())];
}

SparseOperator SparseOperator::transpose() const {
  std::vector<Index> count(static_cast<std::size_t>(rows_) + 1, 0);
  for (Index r : row_idx_) ++count[r + 1];
  for (Index r = 0; r < rows_; ++r) count[r + 1] += count[r];
  std::vector<Index> col_ptr = count;
  std::vector<Index> row_idx(row_idx_.size());
  std::vector<double> values(values_.size());
  for (Index c = 0; c < cols_; ++c) {
    for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      const Index dst = count[row_idx_[k]]++;
      row_idx[dst] = c;
      values[dst] = values_[k];
    }
  }
  return SparseOperator(cols_, rows_, std::move(col_ptr), std::move(row_idx), std::move(values),
                        symmetric_);
}

SparseOperator SparseOperator::multiply(const SparseOperator& b) const {
  if (cols_ != b.rows_) throw Error("dimension mismatch in sparse product");
  std::vector<Index> col_ptr(static_cast<std::size_t>(b.cols_) + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  std::vector<double> acc(static_cast<std::size_t>(rows_), 0.0);
  std::vector<Index> mark(static_cast<std::size_t>(rows_), -1);
  std::vector<Index> touched;
  for (Index j = 0; j < b.cols_; ++j) {
    touched.clear();
    for (Index kb = b.col_ptr_[j]; kb < b.col_ptr_[j + 1]; ++kb) {
      const Index k = b.row_idx_[kb];
      const double bv = b.values_[kb];
      for (Index ka = col_ptr_[k]; ka < col_ptr_[k + 1]; ++ka) {
        const Index i = row_idx_[ka];
        if (mark[i] != j) {
          mark[i] = j;
          acc[i] = 0.0;
          touched.push_back(i);
        }
        acc[i] += values_[ka] * bv;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index i : touched) {
      if (acc[i] != 0.0) {
        row_idx.push_back(i);
        values.push_back(acc[i]);
      }
    }
    col_ptr[j + 1] = static_cast<Index>(row_idx.size());
  }
  return SparseOperator(rows_, b.cols_, std::move(col_ptr), std::move(row_idx), std::move(values),
                        false);
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != cols_) throw Error("dimension mismatch in apply");
  std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
  for (Index c = 0; c < cols_; ++c) {
    for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) y[row_idx_[k]] += values_[k] * x[c];
  }
  return y;
}

bool SparseOperator::identical(const SparseOperator& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && col_ptr_ == o.col_ptr_ &&
         row_idx_ == o.row_idx_ && values_ == o.values_;
}

bool SparseOperator::is_symmetric() const {
  if (rows_ != cols_) return false;
  const SparseOperator t = transpose();
  return col_ptr_ == t.col_ptr_ && row_idx_ == t.row_idx_ && values_ == t.values_;
}

bool SparseOperator::well_formed() const {
  if (static_cast<Index>(col_ptr_.size()) != cols_ + 1 || col_ptr_.front() != 0) return false;
  for (Index c = 0; c < cols_; ++c) {
    if (col_ptr_[c + 1] < col_ptr_[c]) return false;
    for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      if (row_idx_[k] < 0 || row_idx_[k] >= rows_) return false;
      if (k > col_ptr_[c] && row_idx_[k] <= row_idx_[k - 1]) return false;
      if (values_[k] == 0.0) return false;
    }
  }
  return true;
}

void SparseOperator::write_coordinates(std::ostream& os) const {
  os << "% " << rows_ << ' ' << cols_ << ' ' << nonzeros() << '\n';
  os << std::setprecision(17);
  for (Index c = 0; c < cols_; ++c) {
    for (Index k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      os << row_idx_[k] << ' ' << c << ' ' << values_[k] << '\n';
    }
  }
}

}  // namespace latcas
