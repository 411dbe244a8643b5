#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "latcas/linalg/ordering.hpp"
#include "latcas/linalg/schur.hpp"
#include "latcas/operators.hpp"
#include "latcas/oracle.hpp"
#include "support.hpp"

using namespace latcas;
using namespace latcas::linalg;

namespace {

SparseOperator from_dense(const Eigen::MatrixXd& m) {
  std::vector<Triplet> t;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) != 0.0) t.push_back({i, j, m(i, j)});
    }
  }
  return SparseOperator::from_triplets(m.rows(), m.cols(), std::move(t), true);
}

// Sparse, diagonally dominant, symmetric.
SparseOperator random_spd(Index n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      if (coin(rng) < density) m(i, j) = m(j, i) = u(rng);
    }
  }
  for (Index i = 0; i < n; ++i) m(i, i) = m.row(i).cwiseAbs().sum() + 0.5 + coin(rng);
  return from_dense(m);
}

Eigen::MatrixXd to_eigen(const SparseOperator& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Index c = 0; c < a.cols(); ++c) {
    for (Index p = a.col_ptr()[c]; p < a.col_ptr()[c + 1]; ++p) m(a.row_idx()[p], c) = a.values()[p];
  }
  return m;
}

double oracle_logdet(const SparseOperator& a) {
  return oracle::dense_logdet(oracle::DenseMatrix::from_sparse(a));
}

}  // namespace

TEST_CASE("trivial factorizations") {
  const auto id = from_dense(Eigen::MatrixXd::Identity(10, 10));
  const auto f = factorize(id);
  CHECK(f.logdet() == 0.0);
  CHECK(f.dense_lower().isApprox(Eigen::MatrixXd::Identity(10, 10)));
  Eigen::MatrixXd d2 = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(factorize(from_dense(d2)).logdet() == doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("block diagonal log-determinant is additive") {
  std::mt19937_64 rng(2);
  const auto a = to_eigen(random_spd(7, 0.5, rng));
  const auto b = to_eigen(random_spd(9, 0.5, rng));
  Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(16, 16);
  ab.topLeftCorner(7, 7) = a;
  ab.bottomRightCorner(9, 9) = b;
  const double sum = factorize(from_dense(a)).logdet() + factorize(from_dense(b)).logdet();
  CHECK(factorize(from_dense(ab)).logdet() == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("random SPD 12x12 against the dense oracle") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_spd(12, 0.4, rng);
    CHECK(std::abs(factorize(a).logdet() - oracle_logdet(a)) < 1e-10);
  }
}

TEST_CASE("D_G on random 8x8 lattice against the dense oracle") {
  std::mt19937_64 rng(6);
  const Lattice lat({8, 8});
  for (int t = 0; t < 5; ++t) {
    const auto a = assemble_DG(lat, testing::random_map(lat, rng), 0.3 + 0.2 * t);
    CHECK(testing::rel_err(factorize(a).logdet(), oracle_logdet(a)) < 1e-8);
  }
}

TEST_CASE("factor reconstructs the permuted matrix") {
  std::mt19937_64 rng(8);
  const Lattice lat({4, 4, 4});
  for (const auto& a : {random_spd(150, 0.03, rng), assemble_DA(lat, testing::random_map(lat, rng), 0.4),
                        assemble_DG(lat, testing::random_map(lat, rng), 0.4)}) {
    const auto f = factorize(a);
    const Eigen::MatrixXd l = f.dense_lower();
    const Eigen::MatrixXd dense = to_eigen(a);
    Eigen::MatrixXd pap(a.rows(), a.rows());
    const auto perm = f.permutation();
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < a.rows(); ++j) pap(i, j) = dense(perm[i], perm[j]);
    }
    CHECK((l * l.transpose() - pap).norm() / pap.norm() < 1e-10);
    CHECK(l.diagonal().minCoeff() > 0.0);
    CHECK(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);

    std::vector<double> b(static_cast<std::size_t>(a.rows()));
    for (auto& x : b) x = std::normal_distribution<double>()(rng);
    const auto x = f.solve(b);
    const auto r = a.apply(x);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(r[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_CASE("log-determinant is ordering invariant") {
  std::mt19937_64 rng(10);
  const Lattice lat({10, 10});
  const auto a = assemble_DG(lat, testing::random_map(lat, rng), 0.2);
  const double amd = factorize(a).logdet();
  std::vector<Index> natural(static_cast<std::size_t>(a.rows()));
  std::iota(natural.begin(), natural.end(), Index{0});
  std::vector<Index> reversed(natural.rbegin(), natural.rend());
  const double nat = factorize(a, analyze_with_order(a, natural, {})).logdet();
  const double rev = factorize(a, analyze_with_order(a, reversed, {})).logdet();
  const double flat = factorize(a, analyze(a, {}, {.amalgamate = false, .positions = {}})).logdet();
  CHECK(testing::rel_err(amd, nat) < 1e-12);
  CHECK(testing::rel_err(amd, rev) < 1e-12);
  CHECK(testing::rel_err(amd, flat) < 1e-12);
}

TEST_CASE("minimum degree ordering is a permutation and limits fill") {
  const Lattice lat({32, 32});
  const auto a = assemble_DG(lat, MaterialMap(lat), 0.5);
  const auto order = approximate_minimum_degree(full_graph(a));
  std::vector<Index> sorted(order);
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < a.rows(); ++i) CHECK(sorted[i] == i);
  std::vector<Index> natural(static_cast<std::size_t>(a.rows()));
  std::iota(natural.begin(), natural.end(), Index{0});
  const auto amd = analyze(a);
  const auto nat = analyze_with_order(a, natural, {});
  CHECK(amd->factor_nonzeros() < nat->factor_nonzeros() / 2);
}

TEST_CASE("not positive definite names the pivot") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(5, 5);
  m(3, 3) = -1.0;
  try {
    factorize(from_dense(m));
    FAIL("expected failure");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.index() == 3);
    CHECK(e.pivot() == -1.0);
  }
}

TEST_CASE("analysis reuse is checked") {
  const Lattice lat({6, 6});
  const auto a = assemble_DG(lat, MaterialMap(lat), 0.5);
  const auto sym = analyze(a);
  const auto b = assemble_DA(lat, MaterialMap(lat), 0.5);
  CHECK_THROWS_AS(factorize(b, sym), Error);
  const Index before = factorization_count();
  factorize(a, sym);
  CHECK(factorization_count() == before + 1);
}

TEST_CASE("2x2 Schur complement") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 3;
  const SchurPlan plan(2, {1});
  const auto r = schur_complement(from_dense(m), plan);
  CHECK(r.S(0, 0) == doctest::Approx(2.5));
  CHECK(r.logdet_bulk() == doctest::Approx(std::log(2.0)));
  CHECK(r.logdet() == doctest::Approx(std::log(5.0)));
  const auto e = schur_complement_explicit(from_dense(m), plan);
  CHECK(e.S(0, 0) == doctest::Approx(2.5));
}

TEST_CASE("decoupled blocks give S = Z exactly") {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(9, 9);
  m.topLeftCorner(6, 6) = to_eigen(random_spd(6, 0.5, rng));
  m.bottomRightCorner(3, 3) = to_eigen(random_spd(3, 1.0, rng));
  const auto r = schur_complement(from_dense(m), SchurPlan(9, {6, 7, 8}));
  CHECK(r.S == m.bottomRightCorner(3, 3));
}

TEST_CASE("Schur identity on D_G with a plaquette closure") {
  std::mt19937_64 rng(14);
  const Lattice lat({10, 10});
  const auto a = assemble_DG(lat, testing::random_map(lat, rng), 0.3);
  const WaveOperatorBuilder b(lat, Formulation::magnetic);
  const auto face = lat.links_of_face(lat.face({4, 4, 0}, 2));
  std::vector<LinkId> links;
  for (const auto& inc : face) links.push_back(inc.id);
  const auto z = b.closure(links);
  CHECK(z.size() == 5);
  const auto r = schur_complement(a, SchurPlan(a.rows(), z));
  CHECK(std::abs(factorize(a).logdet() - r.logdet()) < 1e-8);
}

TEST_CASE("Schur identity on random partitions") {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 20; ++t) {
    const Index n = 20 + static_cast<Index>(rng() % 181);
    const auto a = random_spd(n, 4.0 / static_cast<double>(n), rng);
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(1 + rng() % 15);
    const SchurPlan plan(n, idx);
    const auto r = schur_complement(a, plan);
    const double full = oracle_logdet(a);
    CHECK(testing::rel_err(r.logdet(), full) < 1e-8);
    const auto e = schur_complement_explicit(a, plan);
    CHECK((e.S - r.S).norm() < 1e-10 * r.S.norm());
    CHECK(testing::rel_err(e.logdet(), full) < 1e-8);
    // Z entries come back in plan order.
    const auto dz = to_eigen(a);
    if (idx.size() == 1) CHECK(r.S(0, 0) <= dz(idx[0], idx[0]));
  }
}

TEST_CASE("plan validation and closure") {
  CHECK_THROWS_AS(SchurPlan(4, {1, 1}), Error);
  CHECK_THROWS_AS(SchurPlan(4, {4}), Error);
  CHECK_THROWS_AS(SchurPlan(2, {0, 1}), Error);
  CHECK_THROWS_AS(SchurPlan(4, {1, 2}, {{0, 2}}), Error);
  const SchurPlan plan(6, {4, 1});
  CHECK(plan.position(1) == 1);
  CHECK(plan.position(0) == -1);
  std::vector<EntryDelta> ok{{1, 4, 0.5}};
  CHECK_NOTHROW(plan.check_closure(ok));
  std::vector<EntryDelta> bad{{1, 3, 0.5}};
  CHECK_THROWS_AS(plan.check_closure(bad), ClosureViolation);
  CHECK(plan.to_local(ok)[0].row == 1);
  CHECK(plan.to_local(ok)[0].col == 0);
}

TEST_CASE("perturbed log-determinant family") {
  SUBCASE("scalar Schur value") {
    Eigen::MatrixXd s(1, 1);
    s << 3.0;
    const std::vector<Perturbation> p{{{0}, {{0, 0, 0.5}}}};
    const auto fam = perturbed_logdet_family(s, p);
    CHECK(fam.value(0) == doctest::Approx(std::log(3.5)));
  }
  SUBCASE("zero perturbations give equal values") {
    std::mt19937_64 rng(18);
    const Eigen::MatrixXd s = to_eigen(random_spd(6, 0.6, rng));
    const std::vector<Perturbation> p{{{0, 1}, {}}, {{4}, {}}};
    const auto fam = perturbed_logdet_family(s, p);
    CHECK(fam.value(0) - fam.value(1) == 0.0);
    CHECK(fam.value(0) == doctest::Approx(spd_logdet(s)));
  }
  SUBCASE("differences match full dense determinants") {
    std::mt19937_64 rng(20);
    const Eigen::MatrixXd s = to_eigen(random_spd(12, 0.5, rng));
    const std::vector<Perturbation> p{{{1, 3, 5}, {{1, 1, 0.7}, {3, 5, -0.2}}},
                                      {{8, 9}, {{8, 9, 0.3}, {9, 9, 1.1}}}};
    const auto fam = perturbed_logdet_family(s, p);
    for (std::size_t k = 0; k < p.size(); ++k) {
      Eigen::MatrixXd m = s;
      for (const auto& d : p[k].deltas) {
        m(d.row, d.col) += d.value;
        if (d.row != d.col) m(d.col, d.row) += d.value;
      }
      CHECK(std::abs(fam.value(k) - spd_logdet(m)) < 1e-9);
    }
  }
  SUBCASE("entries outside the declared subset are rejected") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
    const std::vector<Perturbation> p{{{0}, {{0, 1, 0.1}}}};
    CHECK_THROWS_AS(perturbed_logdet_family(s, p), ClosureViolation);
  }
}
