#pragma once

// Discrete curl pair and the two imaginary-frequency wave operators.
//
//   vector potential (links):  D_A = eps(l, w) w^2 / c^2 + Curl* Curl
//   magnetic (faces):          D_G = w^2 / c^2 + Curl (1 / eps(l, w)) Curl*
//
// Both are real symmetric positive definite for w > 0. Their sparsity patterns
// do not depend on the material or the frequency, so a builder computes the
// pattern once and refills values per (material map, frequency).

#include <array>
#include <span>
#include <string>
#include <vector>

#include "latcas/lattice.hpp"
#include "latcas/materials.hpp"
#include "latcas/sparse_operator.hpp"

namespace latcas {

enum class Formulation {
  vector_potential,  // D_A, unknowns on links
  magnetic,          // D_G, unknowns on faces
};

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

/// Curl: links -> faces. 3D: 3V x 3V with 12V entries; 2D: V x 2V with 4V.
SparseOperator assemble_curl(const Lattice& lat);
/// Curl*: faces -> links, the exact transpose of assemble_curl.
SparseOperator assemble_curl_star(const Lattice& lat);
/// Discrete gradient: sites -> links, (grad phi)(s, a) = phi(s + e_a) - phi(s).
SparseOperator assemble_gradient(const Lattice& lat);

SparseOperator assemble_DA(const Lattice& lat, const MaterialMap& map, double omega, double c = 1.0);
SparseOperator assemble_DG(const Lattice& lat, const MaterialMap& map, double omega, double c = 1.0);

/// Symmetric change of one operator entry; off-diagonal deltas apply to
/// (row, col) and (col, row).
struct EntryDelta {
  Index row;
  Index col;
  double value;
};

class WaveOperatorBuilder {
 public:
  WaveOperatorBuilder(Lattice lat, Formulation f, double c = 1.0);

  const Lattice& lattice() const { return lat_; }
  Formulation formulation() const { return formulation_; }
  double speed_of_light() const { return c_; }
  Index dof_count() const { return pattern_.rows(); }

  /// Shared sparsity pattern (all values 1).
  const SparseOperator& pattern() const { return pattern_; }

  SparseOperator assemble(const MaterialMap& map, double omega) const;
  /// Assembly from precomputed per-link permittivities.
  SparseOperator assemble(std::span<const double> link_epsilon, double omega) const;

  /// Geometric position of every unknown (link midpoints or face centres).
  std::vector<std::array<double, 3>> dof_positions() const;

  /// Unknowns whose operator entries depend on the material of these links,
  /// sorted and unique.
  std::vector<Index> closure(std::span<const LinkId> links) const;

  /// Entry deltas (row <= col) turning the operator for `base` into the one
  /// for `base` with `links` reassigned to `model`.
  std::vector<EntryDelta> delta(const MaterialMap& base, std::span<const LinkId> links,
                                const DielectricModel& model, double omega) const;
  /// Entry deltas turning the operator for `from` into the one for `to` on the
  /// given links (which must include every differing link).
  std::vector<EntryDelta> delta(const MaterialMap& from, const MaterialMap& to,
                                std::span<const LinkId> links, double omega) const;

 private:
  void check_frequency(double omega) const;
  std::vector<EntryDelta> delta_from_eps(std::span<const LinkId> links,
                                         std::span<const double> eps_from,
                                         std::span<const double> eps_to, double omega) const;

  Lattice lat_;
  Formulation formulation_;
  double c_;
  SparseOperator pattern_;
  // Per stored entry: value = constant + diag_scale * w^2/c^2 [* eps(dof)] +
  // sum over terms of coefficient / eps(link).
  std::vector<double> constant_;
  std::vector<char> diagonal_;
  std::vector<Index> term_ptr_;
  std::vector<Index> term_link_;
  std::vector<double> term_coef_;
};

}  // namespace latcas
