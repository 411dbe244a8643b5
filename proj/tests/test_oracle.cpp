#include <cmath>
#include <random>

#include "doctest.h"
#include "latcas/linalg/cholesky.hpp"
#include "latcas/oracle.hpp"
#include "support.hpp"

using namespace latcas;
using namespace latcas::oracle;

TEST_CASE("dense log-determinant") {
  DenseMatrix id(6);
  for (Index i = 0; i < 6; ++i) id(i, i) = 1.0;
  CHECK(dense_logdet(id) == 0.0);
  DenseMatrix d(5);
  for (Index i = 0; i < 5; ++i) d(i, i) = static_cast<double>(i + 1);
  CHECK(dense_logdet(d) == doctest::Approx(4.787492).epsilon(1e-6));
  d(2, 2) = -3.0;
  CHECK_THROWS_AS(dense_logdet(d), NotPositiveDefinite);
}

TEST_CASE("dimension cap") {
  CHECK_NOTHROW(DenseMatrix{kMaxDimension});
  CHECK_THROWS_AS(DenseMatrix{kMaxDimension + 1}, Error);
  const Lattice big({70, 70});
  const MaterialMap m(big);
  CHECK_THROWS_AS(dense_DG(big, m, 1.0), Error);
}

TEST_CASE("dense operators match the sparse assembly") {
  std::mt19937_64 rng(21);
  for (const auto& lat : {Lattice({6, 5}), Lattice({4, 4, 4})}) {
    const auto map = testing::random_map(lat, rng);
    for (const auto f : {Formulation::vector_potential, Formulation::magnetic}) {
      const auto sparse = DenseMatrix::from_sparse(WaveOperatorBuilder(lat, f).assemble(map, 0.6));
      const auto dense = dense_operator(f, lat, map, 0.6);
      for (Index i = 0; i < dense.size(); ++i) {
        for (Index j = 0; j < dense.size(); ++j) {
          CHECK(dense(i, j) == doctest::Approx(sparse(i, j)).epsilon(1e-14));
        }
      }
      CHECK(dense.is_symmetric());
    }
  }
}

TEST_CASE("matches sparse log-determinant on D_G 8x8") {
  std::mt19937_64 rng(22);
  const Lattice lat({8, 8});
  const auto a = assemble_DG(lat, testing::random_map(lat, rng), 0.5);
  CHECK(testing::rel_err(dense_logdet(DenseMatrix::from_sparse(a)), linalg::factorize(a).logdet()) <
        1e-8);
}

TEST_CASE("dense free energy: identical configurations and formulation agreement") {
  const Lattice lat({12, 12});
  const auto grid = build_grid(0.15, 12);
  const auto p = make_constant(8.0);
  MaterialMap a(lat), b(lat);
  for (const auto& inc : lat.links_of_face(lat.face({2, 2, 0}, 2))) {
    a.assign(inc.id, p);
    b.assign(inc.id, p);
  }
  for (const auto& inc : lat.links_of_face(lat.face({5, 5, 0}, 2))) a.assign(inc.id, p);
  for (const auto& inc : lat.links_of_face(lat.face({8, 8, 0}, 2))) b.assign(inc.id, p);
  CHECK(dense_free_energy_difference(a, a, grid) == 0.0);
  const double g = dense_free_energy_difference(a, b, grid, Formulation::magnetic);
  const double v = dense_free_energy_difference(a, b, grid, Formulation::vector_potential);
  CHECK(g < 0.0);
  CHECK(testing::rel_err(g, v) < 1e-6);
}
