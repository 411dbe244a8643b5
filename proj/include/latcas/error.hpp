#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latcas {

using Index = std::int64_t;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised by the factorization when a pivot is not strictly positive.
/// `index` is the offending row/column in the caller's (unpermuted) numbering.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(Index index, double pivot)
      : Error("matrix is not positive definite: pivot " + std::to_string(pivot) +
              " at index " + std::to_string(index)),
        index_(index),
        pivot_(pivot) {}
  Index index() const { return index_; }
  double pivot() const { return pivot_; }

 private:
  Index index_;
  double pivot_;
};

/// A perturbation touches degrees of freedom outside the retained block.
class ClosureViolation : public Error {
 public:
  explicit ClosureViolation(const std::string& msg) : Error("closure violation: " + msg) {}
};

}  // namespace latcas
