#include "latcas/linalg/schur.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace latcas::linalg {

SchurPlan::SchurPlan(Index n, std::vector<Index> retained, std::vector<std::vector<Index>> subsets)
    : n_(n), retained_(std::move(retained)), subsets_(std::move(subsets)),
      zpos_(static_cast<std::size_t>(n), -1) {
  if (n <= 0) throw Error("Schur plan requires a positive dimension");
  for (std::size_t k = 0; k < retained_.size(); ++k) {
    const Index i = retained_[k];
    if (i < 0 || i >= n) throw Error("retained index " + std::to_string(i) + " out of range");
    if (zpos_[i] >= 0) throw Error("retained index " + std::to_string(i) + " repeated");
    zpos_[i] = static_cast<Index>(k);
  }
  if (static_cast<Index>(retained_.size()) >= n) throw Error("Schur plan leaves no bulk block");
  const Index nz = static_cast<Index>(retained_.size());
  for (const auto& sub : subsets_) {
    std::vector<Index> sorted(sub);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error("level-3 subset repeats a position");
    }
    for (const Index p : sub) {
      if (p < 0 || p >= nz) throw Error("level-3 subset position outside the retained block");
    }
  }
}

void SchurPlan::check_closure(std::span<const EntryDelta> deltas) const {
  for (const auto& d : deltas) {
    for (const Index i : {d.row, d.col}) {
      if (i < 0 || i >= n_ || zpos_[i] < 0) {
        throw ClosureViolation("entry (" + std::to_string(d.row) + ", " + std::to_string(d.col) +
                               ") changes outside the retained block");
      }
    }
  }
}

std::vector<EntryDelta> SchurPlan::to_local(std::span<const EntryDelta> deltas) const {
  check_closure(deltas);
  std::vector<EntryDelta> out;
  out.reserve(deltas.size());
  for (const auto& d : deltas) out.push_back({zpos_[d.row], zpos_[d.col], d.value});
  return out;
}

double SchurResult::logdet() const { return bulk.logdet() + spd_logdet(S); }

std::shared_ptr<const SymbolicAnalysis> analyze(const SparseOperator& a, const SchurPlan& plan) {
  if (a.rows() != plan.size()) throw Error("Schur plan size does not match the matrix");
  return analyze(a, plan.retained());
}

SchurResult schur_complement(const SparseOperator& a, const SchurPlan& plan,
                             std::shared_ptr<const SymbolicAnalysis> sym, FactorOptions opts) {
  if (a.rows() != plan.size()) throw Error("Schur plan size does not match the matrix");
  if (!sym) sym = analyze(a, plan);
  if (sym->retained != static_cast<Index>(plan.retained().size()) ||
      !std::equal(plan.retained().begin(), plan.retained().end(), sym->perm.end() - sym->retained)) {
    throw Error("symbolic analysis was built for a different retained block");
  }
  SchurResult r{factorize(a, sym, opts), {}};
  r.S = r.bulk.schur();
  return r;
}

SchurResult schur_complement_explicit(const SparseOperator& a, const SchurPlan& plan) {
  const Index n = a.rows();
  if (n != plan.size()) throw Error("Schur plan size does not match the matrix");
  std::vector<Index> bulk, local(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    if (!plan.in_retained(i)) {
      local[i] = static_cast<Index>(bulk.size());
      bulk.push_back(i);
    }
  }
  const Index nx = static_cast<Index>(bulk.size());
  const Index nz = static_cast<Index>(plan.retained().size());
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  const auto v = a.values();

  std::vector<Triplet> tx;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(nx, nz);
  for (Index c = 0; c < n; ++c) {
    for (Index p = cp[c]; p < cp[c + 1]; ++p) {
      const Index r = ri[p];
      const bool rz = plan.in_retained(r), cz = plan.in_retained(c);
      if (!rz && !cz) {
        tx.push_back({local[r], local[c], v[p]});
      } else if (rz && cz) {
        z(plan.position(r), plan.position(c)) = v[p];
      } else if (!rz && cz) {
        y(local[r], plan.position(c)) = v[p];
      }
    }
  }
  const SparseOperator x = SparseOperator::from_triplets(nx, nx, std::move(tx), true);
  SchurResult r{factorize(x), {}};
  Eigen::MatrixXd u(nx, nz);
  std::vector<double> col(static_cast<std::size_t>(nx));
  for (Index k = 0; k < nz; ++k) {
    for (Index i = 0; i < nx; ++i) col[i] = y(i, k);
    u.col(k) = r.bulk.forward_solve(col);
  }
  r.S = z;
  r.S.noalias() -= u.transpose() * u;
  return r;
}

double spd_logdet(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error("spd_logdet: matrix is not square");
  if (m.rows() == 0) return 0.0;
  Eigen::MatrixXd l = m;
  const Index bad = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(l);
  if (bad >= 0) throw NotPositiveDefinite(bad, l(bad, bad));
  long double sum = 0.0L;
  for (Index j = 0; j < l.rows(); ++j) sum += std::log(l(j, j));
  return static_cast<double>(2.0L * sum);
}

LogdetFamily perturbed_logdet_family(const Eigen::MatrixXd& s_vac,
                                     std::span<const Perturbation> perturbations) {
  const Index nz = s_vac.rows();
  if (s_vac.cols() != nz) throw Error("effective matrix is not square");
  LogdetFamily fam;
  Eigen::LLT<Eigen::MatrixXd> llt(s_vac);
  if (llt.info() != Eigen::Success) throw Error("effective matrix is not positive definite");
  fam.common = 0.0;
  for (Index j = 0; j < nz; ++j) fam.common += 2.0 * std::log(llt.matrixLLT()(j, j));
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(nz, nz));

  std::vector<Index> where(static_cast<std::size_t>(nz), -1);
  for (const auto& pert : perturbations) {
    const Index m = static_cast<Index>(pert.subset.size());
    for (Index k = 0; k < m; ++k) {
      const Index p = pert.subset[k];
      if (p < 0 || p >= nz) throw ClosureViolation("subset position outside the effective matrix");
      if (where[p] >= 0) throw Error("perturbation subset repeats a position");
      where[p] = k;
    }
    Eigen::MatrixXd sub(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) sub(a, b) = inv(pert.subset[a], pert.subset[b]);
    }
    Eigen::MatrixXd s3 = sub.inverse();
    s3 = 0.5 * (s3 + s3.transpose()).eval();
    Eigen::MatrixXd bumped = s3;
    for (const auto& d : pert.deltas) {
      const bool ok = d.row >= 0 && d.row < nz && d.col >= 0 && d.col < nz &&
                      where[d.row] >= 0 && where[d.col] >= 0;
      if (!ok) {
        for (const Index p : pert.subset) where[p] = -1;
        throw ClosureViolation("perturbation entry (" + std::to_string(d.row) + ", " +
                               std::to_string(d.col) + ") outside its declared subset");
      }
      const Index a = where[d.row], b = where[d.col];
      bumped(a, b) += d.value;
      if (a != b) bumped(b, a) += d.value;
    }
    for (const Index p : pert.subset) where[p] = -1;
    fam.relative.push_back(spd_logdet(bumped) - spd_logdet(s3));
  }
  return fam;
}

}  // namespace latcas::linalg
