#include "latcas/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace latcas::oracle {

DenseMatrix::DenseMatrix(Index n) : n_(n) {
  if (n < 0 || n > kMaxDimension) {
    throw Error("dense oracle dimension " + std::to_string(n) + " exceeds the cap of " +
                std::to_string(kMaxDimension));
  }
  data_.assign(static_cast<std::size_t>(n * n), 0.0);
}

DenseMatrix DenseMatrix::from_sparse(const SparseOperator& a) {
  if (a.rows() != a.cols()) throw Error("dense oracle needs a square matrix");
  DenseMatrix d(a.rows());
  const auto cp = a.col_ptr();
  const auto ri = a.row_idx();
  const auto v = a.values();
  for (Index c = 0; c < a.cols(); ++c) {
    for (Index p = cp[c]; p < cp[c + 1]; ++p) d(ri[p], c) = v[p];
  }
  return d;
}

bool DenseMatrix::is_symmetric(double tol) const {
  double scale = 0.0, worst = 0.0;
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) {
      scale = std::max(scale, std::abs((*this)(i, j)));
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
    }
  }
  return worst <= tol * scale;
}

std::vector<double> DenseMatrix::eigenvalues() const {
  Eigen::MatrixXd m(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("dense eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double min_eigenvalue(const DenseMatrix& a) {
  const auto ev = a.eigenvalues();
  if (ev.empty()) throw Error("empty matrix has no eigenvalues");
  return ev.front();
}

double dense_logdet(const DenseMatrix& a) {
  // Right-looking LDL^T on the lower triangle, no pivoting.
  const Index n = a.size();
  DenseMatrix l = a;
  double sum = 0.0;
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const double d = l(k, k);
    if (!(d > 0.0)) throw NotPositiveDefinite(k, d);
    sum += std::log(d);
    for (Index i = k + 1; i < n; ++i) col[i] = l(i, k);
    for (Index i = k + 1; i < n; ++i) {
      if (col[i] == 0.0) continue;
      const double lik = col[i] / d;
      for (Index j = k + 1; j <= i; ++j) l(i, j) -= lik * col[j];
      l(i, k) = lik;
    }
  }
  return sum;
}

DenseMatrix dense_curl(const Lattice& lat) {
  // Faces by links; only valid when both fit the cap.
  DenseMatrix c(std::max(lat.face_count(), lat.link_count()));
  for (Index f = 0; f < lat.face_count(); ++f) {
    for (const auto& inc : lat.links_of_face(FaceId{f})) c(f, inc.id.value) += inc.sign;
  }
  return c;
}

DenseMatrix dense_DA(const Lattice& lat, const MaterialMap& map, double omega, double c) {
  const Index n = lat.link_count();
  DenseMatrix d(n);
  const double w2 = omega * omega / (c * c);
  for (Index l = 0; l < n; ++l) d(l, l) += eval_epsilon(map.model_at(LinkId{l}), omega) * w2;
  for (Index f = 0; f < lat.face_count(); ++f) {
    const auto links = lat.links_of_face(FaceId{f});
    for (const auto& a : links) {
      for (const auto& b : links) d(a.id.value, b.id.value) += a.sign * b.sign;
    }
  }
  return d;
}

DenseMatrix dense_DG(const Lattice& lat, const MaterialMap& map, double omega, double c) {
  const Index n = lat.face_count();
  DenseMatrix d(n);
  const double w2 = omega * omega / (c * c);
  for (Index f = 0; f < n; ++f) d(f, f) += w2;
  // Curl (1/eps) Curl*: sum over links shared by two faces.
  std::vector<std::vector<std::pair<Index, int>>> faces(static_cast<std::size_t>(lat.link_count()));
  for (Index f = 0; f < n; ++f) {
    for (const auto& inc : lat.links_of_face(FaceId{f})) faces[inc.id.value].push_back({f, inc.sign});
  }
  for (Index l = 0; l < lat.link_count(); ++l) {
    const double inv = 1.0 / eval_epsilon(map.model_at(LinkId{l}), omega);
    for (const auto& [fa, sa] : faces[l]) {
      for (const auto& [fb, sb] : faces[l]) d(fa, fb) += sa * sb * inv;
    }
  }
  return d;
}

DenseMatrix dense_operator(Formulation f, const Lattice& lat, const MaterialMap& map,
                           double omega, double c) {
  return f == Formulation::magnetic ? dense_DG(lat, map, omega, c) : dense_DA(lat, map, omega, c);
}

double dense_free_energy_difference(const MaterialMap& cfg1, const MaterialMap& cfg2,
                                    const FrequencyGrid& grid, Formulation f, double c) {
  if (!(cfg1.lattice() == cfg2.lattice())) throw Error("configurations live on different lattices");
  const Lattice& lat = cfg1.lattice();
  const Index n = f == Formulation::magnetic ? lat.face_count() : lat.link_count();
  if (n > kMaxDimension) throw Error("lattice too large for the dense oracle");
  std::vector<double> vals(static_cast<std::size_t>(grid.ng));
  for (int k = 0; k < grid.ng; ++k) {
    const double w = grid.omega[k];
    vals[k] = dense_logdet(dense_operator(f, lat, cfg1, w, c)) -
              dense_logdet(dense_operator(f, lat, cfg2, w, c));
  }
  return integrate(grid, vals);
}

}  // namespace latcas::oracle
