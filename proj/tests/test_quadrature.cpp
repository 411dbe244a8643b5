#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "latcas/oracle.hpp"
#include "latcas/quadrature.hpp"
#include "support.hpp"

using namespace latcas;

namespace {

MaterialMap with_particles(const Lattice& lat, std::initializer_list<Coord> at,
                           const DielectricModel& m) {
  MaterialMap map(lat);
  for (const Coord& c : at) {
    for (const auto& inc : lat.links_of_face(lat.face(c, 2))) map.assign(inc.id, m);
  }
  return map;
}

}  // namespace

TEST_CASE("two-point rule") {
  const auto g = build_grid(1.0, 2);
  CHECK(g.z[0] == doctest::Approx(0.5 - 1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(g.z[1] == doctest::Approx(0.5 + 1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(g.z[0] == doctest::Approx(0.211325).epsilon(1e-6));
  CHECK(g.w[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.w[1] == doctest::Approx(0.5).epsilon(1e-15));
  const double integral = g.w[0] * g.z[0] * g.z[0] + g.w[1] * g.z[1] * g.z[1];
  CHECK(integral == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("substitution") {
  const auto g = build_grid(2.0, 3);
  CHECK(g.z[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.omega[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(g.jacobian[1] == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS_AS(build_grid(0.0, 4), Error);
  CHECK_THROWS_AS(build_grid(1.0, 1), Error);
}

TEST_CASE("grid invariants and polynomial exactness") {
  for (const int n : {2, 5, 8, 20, 25, 40, 64}) {
    const auto g = build_grid(0.7, n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += g.w[k];
      CHECK(g.z[k] > 0.0);
      CHECK(g.z[k] < 1.0);
      CHECK(g.w[k] > 0.0);
      CHECK(std::isfinite(g.omega[k]));
      if (k > 0) CHECK(g.omega[k] > g.omega[k - 1]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    // Exact for degree 2n - 1.
    double mono = 0.0;
    for (int k = 0; k < n; ++k) mono += g.w[k] * std::pow(g.z[k], 2 * n - 1);
    CHECK(mono == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-12));
  }
}

TEST_CASE("integrate applies the 1/2pi prefactor") {
  // int_0^inf dw / 2pi * 1 / (1 + w^2) = 1/4.
  const auto g = build_grid(1.0, 40);
  std::vector<double> f;
  for (const double w : g.omega) f.push_back(1.0 / (1.0 + w * w));
  CHECK(integrate(g, f) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK_THROWS_AS(integrate(g, std::vector<double>(3)), Error);
}

TEST_CASE("alpha selection") {
  CHECK(select_alpha({1.0, 10.0}) == doctest::Approx(0.1));
  CHECK(select_alpha({1.0, 10.0, 0.01}) == doctest::Approx(0.01));
  CHECK(select_alpha({1.0, 10.0, 5.0}) == doctest::Approx(0.1));
  CHECK(select_alpha({2.0, std::nullopt}) == 2.0);
}

TEST_CASE("free energy difference basics") {
  const Lattice lat({16, 16});
  const auto grid = build_grid(0.1, 6);
  const auto p = make_constant(8.0);
  const auto a = with_particles(lat, {{3, 3, 0}, {7, 7, 0}}, p);
  const auto b = with_particles(lat, {{3, 3, 0}, {11, 11, 0}}, p);

  CHECK(free_energy_difference(a, a, grid).value == 0.0);
  const double ab = free_energy_difference(a, b, grid).value;
  const double ba = free_energy_difference(b, a, grid).value;
  CHECK(ab == -ba);
  CHECK(ab < 0.0);

  // The same pair translated: identical energy.
  const auto shifted = with_particles(lat, {{5, 4, 0}, {9, 8, 0}}, p);
  CHECK(std::abs(free_energy_difference(a, shifted, grid).value) < 1e-10);

  const double dense = oracle::dense_free_energy_difference(a, b, grid);
  CHECK(testing::rel_err(ab, dense) < 1e-6);

  std::ostringstream os;
  const auto res = free_energy_difference(a, b, grid);
  write_nodes_csv(os, grid, res.nodes);
  CHECK(os.str().find("node,z,omega,weight,delta_logdet") != std::string::npos);
  CHECK(res.factorizations == grid.ng);
}

TEST_CASE("threaded nodes reduce deterministically and resume from cache") {
  const Lattice lat({12, 12});
  const auto grid = build_grid(0.2, 5);
  const auto p = make_single_pole(7.0, 0.1);
  const auto a = with_particles(lat, {{2, 2, 0}, {5, 5, 0}}, p);
  const auto b = with_particles(lat, {{2, 2, 0}, {8, 8, 0}}, p);
  FreeEnergyOptions serial;
  const auto r1 = free_energy_difference(a, b, grid, serial);
  FreeEnergyOptions threaded;
  threaded.threads = 3;
  std::vector<int> seen;
  threaded.on_node = [&](const NodeRecord& r) { seen.push_back(r.node); };
  const auto r2 = free_energy_difference(a, b, grid, threaded);
  CHECK(r1.value == r2.value);
  CHECK(seen.size() == 5);

  FreeEnergyOptions cached;
  cached.cached = [&](int node) -> std::optional<double> {
    if (node < 3) return r1.nodes[node].delta_logdet;
    return std::nullopt;
  };
  const auto r3 = free_energy_difference(a, b, grid, cached);
  CHECK(r3.factorizations == 2);
  CHECK(r3.value == r1.value);
}
