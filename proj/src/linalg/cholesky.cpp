#include "latcas/linalg/cholesky.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "latcas/log.hpp"

namespace latcas::linalg {

namespace {

std::atomic<Index> g_factorizations{0};

struct Update {
  const std::vector<Index>* rows;
  Eigen::MatrixXd u;  // lower triangle significant
};

// Exact failing pivot of a dense block, recomputed unblocked.
double failing_pivot(Eigen::MatrixXd m, Index k) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Index p = 0; p < j; ++p) d -= m(j, p) * m(j, p);
    if (j == k || d <= 0.0) return d;
    d = std::sqrt(d);
    m(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (Index p = 0; p < j; ++p) v -= m(i, p) * m(j, p);
      m(i, j) = v / d;
    }
  }
  return 0.0;
}

}  // namespace

Index factorization_count() { return g_factorizations.load(); }
void reset_factorization_count() { g_factorizations.store(0); }

CholeskyFactor factorize(const SparseOperator& a, const FactorOptions& opts) {
  return factorize(a, analyze(a), opts);
}

CholeskyFactor factorize(const SparseOperator& a, std::shared_ptr<const SymbolicAnalysis> sym,
                         const FactorOptions& opts) {
  if (!sym) throw Error("factorize: missing symbolic analysis");
  if (!sym->matches(a)) throw Error("factorize: matrix pattern differs from the analysis");
  ++g_factorizations;

  const SymbolicAnalysis& s = *sym;
  const Index n = s.n;
  const Index nx = s.bulk();
  const auto values = a.values();

  double max_diag = 0.0;
  for (Index j = 0; j < n; ++j) {
    const Index k = s.amap_ptr[j];
    if (k < s.amap_ptr[j + 1] && s.amap_row[k] == j) {
      max_diag = std::max(max_diag, std::abs(values[s.amap_src[k]]));
    }
  }

  CholeskyFactor f;
  f.symbolic_ = sym;
  f.warn_ratio_ = opts.warn_ratio;
  if (opts.keep_factor) f.panels_.resize(s.supernodes.size());

  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  std::vector<Update> stack;
  std::vector<Index> rel;
  long double logdet = 0.0L;  // extended accumulator; thousands of terms
  double min_pivot = std::numeric_limits<double>::infinity();

  auto extend_add = [&](Eigen::MatrixXd& front, const Update& up) {
    const auto& rows = *up.rows;
    const Index r = static_cast<Index>(rows.size());
    rel.resize(rows.size());
    for (Index k = 0; k < r; ++k) rel[k] = pos[rows[k]];
    for (Index b = 0; b < r; ++b) {
      const Index cb = rel[b];
      const double* src = up.u.data() + b * r;
      for (Index q = b; q < r; ++q) front(rel[q], cb) += src[q];
    }
  };

  for (std::size_t si = 0; si < s.supernodes.size(); ++si) {
    const Supernode& sn = s.supernodes[si];
    const Index w = sn.width();
    const Index r = static_cast<Index>(sn.rows.size());
    const Index m = w + r;
    for (Index j = 0; j < w; ++j) pos[sn.first + j] = j;
    for (Index k = 0; k < r; ++k) pos[sn.rows[k]] = w + k;

    Eigen::MatrixXd front = Eigen::MatrixXd::Zero(m, m);
    for (Index j = sn.first; j < sn.last; ++j) {
      for (Index k = s.amap_ptr[j]; k < s.amap_ptr[j + 1]; ++k) {
        front(pos[s.amap_row[k]], j - sn.first) += values[s.amap_src[k]];
      }
    }
    for (Index c = 0; c < sn.children; ++c) {
      extend_add(front, stack.back());
      stack.pop_back();
    }

    auto f11 = front.topLeftCorner(w, w);
    Eigen::MatrixXd saved;
    if (w <= 64) saved = f11;  // cheap copy for exact pivot diagnostics
    const Index bad = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(f11);
    if (bad >= 0) {
      const double piv = saved.size() ? failing_pivot(saved, bad) : front(bad, bad);
      throw NotPositiveDefinite(s.perm[sn.first + bad], piv);
    }
    for (Index j = 0; j < w; ++j) {
      const double d = f11(j, j);
      logdet += 2.0L * std::log(d);
      min_pivot = std::min(min_pivot, d * d);
    }
    if (r > 0) {
      auto f21 = front.bottomLeftCorner(r, w);
      f11.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(f21);
      Eigen::MatrixXd u = front.bottomRightCorner(r, r);
      u.selfadjointView<Eigen::Lower>().rankUpdate(f21, -1.0);
      stack.push_back({&sn.rows, std::move(u)});
    }
    if (opts.keep_factor) {
      f.panels_[si] = front.leftCols(w);
      f.panels_[si].topRightCorner(w, w).triangularView<Eigen::StrictlyUpper>().setZero();
    }
    for (Index j = 0; j < w; ++j) pos[sn.first + j] = -1;
    for (Index k = 0; k < r; ++k) pos[sn.rows[k]] = -1;
  }

  // Retained block: assemble Z and every pending update into S.
  const Index nz = s.retained;
  if (nz > 0) {
    for (Index k = 0; k < nz; ++k) pos[nx + k] = k;
    Eigen::MatrixXd front = Eigen::MatrixXd::Zero(nz, nz);
    for (Index j = nx; j < n; ++j) {
      for (Index k = s.amap_ptr[j]; k < s.amap_ptr[j + 1]; ++k) {
        front(pos[s.amap_row[k]], j - nx) += values[s.amap_src[k]];
      }
    }
    while (!stack.empty()) {
      extend_add(front, stack.back());
      stack.pop_back();
    }
    front.triangularView<Eigen::StrictlyUpper>() = front.transpose();
    f.schur_ = std::move(front);
  } else if (!stack.empty()) {
    throw Error("factorize: inconsistent supernodal tree");
  }

  f.logdet_ = static_cast<double>(logdet);
  f.min_pivot_ratio_ = (max_diag > 0.0 && nx > 0) ? min_pivot / max_diag : 1.0;
  if (f.conditioning_warning()) {
    std::ostringstream os;
    os << "ill-conditioned factorization";
    if (!opts.context.empty()) os << " at " << opts.context;
    os << ": smallest pivot ratio " << f.min_pivot_ratio_;
    log_warning(os.str());
  }
  return f;
}

Eigen::MatrixXd CholeskyFactor::dense_lower() const {
  if (!has_factor()) throw Error("factor values were not kept");
  const Index nx = symbolic_->bulk();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(nx, nx);
  for (std::size_t si = 0; si < symbolic_->supernodes.size(); ++si) {
    const Supernode& sn = symbolic_->supernodes[si];
    const Eigen::MatrixXd& p = panels_[si];
    const Index w = sn.width();
    l.block(sn.first, sn.first, w, w) = p.topRows(w);
    for (std::size_t k = 0; k < sn.rows.size(); ++k) {
      l.block(sn.rows[k], sn.first, 1, w) = p.row(w + static_cast<Index>(k));
    }
  }
  return l;
}

Eigen::VectorXd CholeskyFactor::forward_solve(std::span<const double> b) const {
  if (!has_factor()) throw Error("factor values were not kept");
  const SymbolicAnalysis& s = *symbolic_;
  if (static_cast<Index>(b.size()) != s.n) throw Error("forward_solve: size mismatch");
  const Index nx = s.bulk();
  Eigen::VectorXd y(nx);
  for (Index k = 0; k < nx; ++k) y[k] = b[s.perm[k]];
  for (std::size_t si = 0; si < s.supernodes.size(); ++si) {
    const Supernode& sn = s.supernodes[si];
    const Index w = sn.width();
    const Eigen::MatrixXd& p = panels_[si];
    auto seg = y.segment(sn.first, w);
    p.topRows(w).triangularView<Eigen::Lower>().solveInPlace(seg);
    if (!sn.rows.empty()) {
      const Eigen::VectorXd upd = p.bottomRows(p.rows() - w) * seg;
      for (std::size_t k = 0; k < sn.rows.size(); ++k) {
        if (sn.rows[k] < nx) y[sn.rows[k]] -= upd[static_cast<Index>(k)];
      }
    }
  }
  return y;
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
  if (has_retained()) throw Error("solve: factor has a retained block");
  const SymbolicAnalysis& s = *symbolic_;
  Eigen::VectorXd y = forward_solve(b);
  for (std::size_t si = s.supernodes.size(); si-- > 0;) {
    const Supernode& sn = s.supernodes[si];
    const Index w = sn.width();
    const Eigen::MatrixXd& p = panels_[si];
    auto seg = y.segment(sn.first, w);
    if (!sn.rows.empty()) {
      Eigen::VectorXd g(static_cast<Index>(sn.rows.size()));
      for (std::size_t k = 0; k < sn.rows.size(); ++k) g[static_cast<Index>(k)] = y[sn.rows[k]];
      seg -= p.bottomRows(p.rows() - w).transpose() * g;
    }
    p.topRows(w).triangularView<Eigen::Lower>().transpose().solveInPlace(seg);
  }
  std::vector<double> x(static_cast<std::size_t>(s.n));
  for (Index k = 0; k < s.n; ++k) x[s.perm[k]] = y[k];
  return x;
}

}  // namespace latcas::linalg
