#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "latcas/experiments.hpp"
#include "latcas/linalg/cholesky.hpp"
#include "support.hpp"

using namespace latcas;
using namespace latcas::experiments;

TEST_CASE("online moments match the two-pass formulas") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1e3, 2.5);
  std::vector<double> xs(5000);
  OnlineMoments m;
  for (auto& x : xs) {
    x = g(rng);
    m.add(x);
  }
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  CHECK(testing::rel_err(m.mean(), mean) < 1e-12);
  CHECK(testing::rel_err(m.variance(), var) < 1e-12);
  OnlineMoments one;
  one.add(4.0);
  CHECK(one.variance() == 0.0);
}

TEST_CASE("exact inverse fifth power") {
  std::vector<double> r, y;
  for (double x = 4; x < 60; x *= 1.3) {
    r.push_back(x);
    y.push_back(std::pow(x, -5));
  }
  const auto f = fit_power_law(r, y);
  CHECK(std::abs(f.exponent + 5.0) < 1e-12);
  CHECK(f.exponent_stderr < 1e-10);
}

TEST_CASE("exact 3 r^-4 recovers amplitude") {
  std::vector<double> r{2, 3, 5, 8, 13}, y;
  for (const double x : r) y.push_back(3.0 * std::pow(x, -4));
  const auto f = fit_power_law(r, y);
  CHECK(f.exponent == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-10));
  std::vector<double> neg;
  for (const double v : y) neg.push_back(-v);
  CHECK(fit_power_law(r, neg).amplitude == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("noisy inverse cube") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> eta(0.0, 0.01);
  std::vector<double> r, y;
  for (double x = 4; x < 200; x *= 1.2) {
    r.push_back(x);
    y.push_back(std::pow(x, -3) * (1.0 + eta(rng)));
  }
  CHECK(std::abs(fit_power_law(r, y).exponent + 3.0) < 0.05);
}

TEST_CASE("fit rejects sign changes and short windows") {
  const std::vector<double> r{1, 2, 3, 4}, y{1, -1, 1, 1};
  CHECK_THROWS_AS(fit_power_law(r, y), Error);
  const std::vector<double> y2{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_power_law(r, y2, {2.5, 10}), Error);
  CHECK_THROWS_AS(fit_power_law(r, y2, {3, 2}), Error);
}

TEST_CASE("geometric ladder with factor sqrt 2") {
  CHECK(geometric_ladder(4, 51.2, std::sqrt(2.0)) == std::vector<Index>{4, 6, 8, 11, 16, 23, 32, 45});
}

TEST_CASE("realization seeds are distinct and reproducible") {
  CHECK(realization_seed(1, 0) == realization_seed(1, 0));
  CHECK(realization_seed(1, 0) != realization_seed(1, 1));
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("checkpoint round trip and resume") {
  const auto file = std::filesystem::temp_directory_path() / "latcas_ckpt_test.csv";
  {
    Checkpoint c(file, false);
    c.put("p:1", 0, {1.0 / 3.0, -2e-300});
    c.put("p:1", 3, {});
    CHECK_THROWS_AS(c.put("a,b", 0, {1.0}), Error);
  }
  {
    Checkpoint c(file, true);
    CHECK(c.size() == 2);
    const auto v = c.get("p:1", 0);
    REQUIRE(v);
    CHECK((*v)[0] == 1.0 / 3.0);
    CHECK((*v)[1] == -2e-300);
    CHECK(!c.get("p:1", 1));
  }
  {
    Checkpoint c(file, false);
    CHECK(c.size() == 0);
  }
  std::filesystem::remove(file);
}

TEST_CASE("placement sweep equals direct subtraction") {
  // three-level Schur path against a Schur-blocked two-configuration
  // difference and against two full factorizations per node
  scenes::ParticlePairScene sc;
  sc.L = 64;
  const DielectricModel m = make_single_pole(7.0, 0.3);
  sc.particle = m;
  const Lattice lat = sc.lattice();
  const MaterialMap base = scenes::place_particle(MaterialMap(lat), sc.origin, m);
  const std::vector<Index> ds{4, 6, 8};
  std::vector<std::vector<LinkId>> placements;
  for (const Index d : ds) placements.push_back(scenes::particle_footprint(lat, sc.partner(d)));
  placements.push_back(scenes::particle_footprint(lat, sc.partner(sc.reference_offset())));
  const auto grid = build_grid(0.2, 6);
  SolverOptions opts;
  linalg::reset_factorization_count();
  const auto sweep = run_placement_sweep(base, placements, m, placements.size() - 1, grid, opts);
  CHECK(sweep.factorizations == grid.ng);
  CHECK(linalg::factorization_count() == grid.ng);
  CHECK(sweep.energies.back() == 0.0);

  const WaveOperatorBuilder b(lat, Formulation::magnetic);
  const auto ref = scenes::build_pair(sc, lat, sc.reference_offset());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto pair = scenes::build_pair(sc, lat, ds[i]);
    CHECK(sweep.energies[i] < 0.0);
    CHECK(testing::rel_err(sweep.energies[i], free_energy_difference(pair, ref, grid).value) < 1e-6);
    std::vector<double> dl;
    for (int k = 0; k < grid.ng; ++k) {
      const double w = grid.omega[k];
      dl.push_back(linalg::factorize(b.assemble(pair, w)).logdet() -
                   linalg::factorize(b.assemble(ref, w)).logdet());
    }
    CHECK(testing::rel_err(sweep.energies[i], integrate(grid, dl)) < 1e-6);
  }
}

TEST_CASE("crossover sweep on a small box") {
  CrossoverConfig cfg;
  cfg.scene.L = 48;
  cfg.omega0 = {std::numeric_limits<double>::infinity(), 0.01};
  cfg.offsets = {4, 6, 8};
  cfg.ng = 6;
  const auto curves = run_crossover_sweep(cfg, {});
  REQUIRE(curves.size() == 2);
  for (const auto& c : curves) {
    CHECK(c.factorizations == 6);
    CHECK(c.r[0] == doctest::Approx(4 * std::sqrt(2.0)));
    // attraction decays with distance
    CHECK(c.U[0] < c.U[1]);
    CHECK(c.U[1] < c.U[2]);
    CHECK(c.U_scaled[0] == doctest::Approx(-c.U[0] * std::pow(c.r[0], 5)));
  }
  cfg.offsets = {24};
  CHECK_THROWS_AS(run_crossover_sweep(cfg, {}), Error);
}

TEST_CASE("node checkpoints are reused without refactorizing") {
  const auto file = std::filesystem::temp_directory_path() / "latcas_ckpt_sweep.csv";
  CrossoverConfig cfg;
  cfg.scene.L = 32;
  cfg.omega0 = {1.0};
  cfg.offsets = {4, 6};
  cfg.ng = 4;
  std::vector<SeparationCurve> first;
  {
    Checkpoint ck(file, false);
    SolverOptions o;
    o.checkpoint = &ck;
    first = run_crossover_sweep(cfg, o);
    CHECK(first[0].factorizations == 4);
  }
  Checkpoint ck(file, true);
  SolverOptions o;
  o.checkpoint = &ck;
  const auto again = run_crossover_sweep(cfg, o);
  CHECK(again[0].factorizations == 0);
  CHECK(again[0].U == first[0].U);
  std::filesystem::remove(file);
}

TEST_CASE("rough ensemble statistics on a small box") {
  RoughConfig cfg;
  cfg.L = 32;
  cfg.distances = {3, 4, 5};
  cfg.realizations = 4;
  cfg.ng = 4;
  SolverOptions opts;
  opts.threads = 2;
  std::vector<Index> seen;
  const auto res = run_rough_ensemble(cfg, opts, [&](const RealizationResult& r) { seen.push_back(r.index); });
  CHECK(res.effective == 4);
  CHECK(res.requested == 4);
  CHECK(seen.size() == 4);
  CHECK(res.reference == 8);
  CHECK(res.factorizations == 5 * 4);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(res.sigma[j] >= 0.0);
    CHECK(res.deltaU[j] == doctest::Approx(res.mean[j] - res.flat[j]));
    OnlineMoments m;
    for (const auto& r : res.realizations) m.add(r.U[j]);
    CHECK(res.mean[j] == doctest::Approx(m.mean()));
  }
  // a single realization reruns bit-identically from its index
  const auto r2 = run_rough_realization(cfg, 2, {});
  CHECK(r2.U == res.realizations[2].U);
  CHECK(r2.heights == res.realizations[2].heights);
}

TEST_CASE("flat baseline against direct subtraction") {
  RoughConfig cfg;
  cfg.L = 24;
  cfg.distances = {3, 4};
  cfg.ng = 4;
  const auto flat = run_flat_baseline(cfg, {});
  const auto s = scenes::flat_surface(24, cfg.material);
  const Lattice lat = s.lattice();
  const auto surf = scenes::build_surface(s, lat);
  const auto ref = scenes::place_probe_particle(s, surf, scenes::reference_probe_distance(s), cfg.probe);
  const auto grid = build_grid(rough_alpha(cfg), cfg.ng);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto at = scenes::place_probe_particle(s, surf, cfg.distances[j], cfg.probe);
    CHECK(testing::rel_err(flat[j], free_energy_difference(at, ref, grid).value) < 1e-6);
  }
  // closer to the surface is more strongly bound
  CHECK(flat[0] < flat[1]);
  CHECK(flat[1] < 0.0);
}

TEST_CASE("torque sweep on a small box") {
  TorqueConfig cfg;
  cfg.scene.box = 12;
  cfg.scene.diameter = 6;
  cfg.scene.thickness = 1;
  cfg.scene.gap = 2;
  cfg.angles_pi = {0.0, 0.25, 0.5, 1.0, 1.25};
  cfg.ng = 3;
  SolverOptions opts;
  opts.nested_dissection = true;
  const auto t = run_torque_sweep(cfg, opts);
  REQUIRE(t.U.size() == 5);
  CHECK(t.factorizations == 5 * 2 * 3);
  CHECK(t.U[0] == 0.0);
  CHECK(t.U[3] == t.U[0]);
  CHECK(t.U[4] == t.U[1]);
  CHECK(t.U[2] > 0.0);
  CHECK(t.torque.size() == 4);
  CHECK(t.torque[0] == doctest::Approx(-(t.U[1] - t.U[0]) / (0.25 * std::numbers::pi)));
  cfg.angles_pi = {0.25, 0.5};
  CHECK_THROWS_AS(run_torque_sweep(cfg, opts), Error);
}
