#include "latcas/cli/checks.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "latcas/linalg/cholesky.hpp"
#include "latcas/linalg/schur.hpp"
#include "latcas/operators.hpp"
#include "latcas/oracle.hpp"
#include "latcas/quadrature.hpp"
#include "latcas/scenes.hpp"

namespace latcas::cli {

namespace {

std::string g_fault;

double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

MaterialMap random_map(const Lattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.0, 10.0);
  MaterialMap m(lat);
  for (Index l = 0; l < lat.link_count(); ++l) m.assign(LinkId{l}, make_constant(u(rng)));
  return m;
}

// Assembly routed through the fault hook.
SparseOperator assemble(const WaveOperatorBuilder& b, const MaterialMap& map, double w) {
  SparseOperator a = b.assemble(map, w);
  if (g_fault == "assembly") {
    // one off-diagonal entry of the upper triangle only
    const auto cp = a.col_ptr();
    const auto ri = a.row_idx();
    for (Index c = 0; c < a.cols(); ++c) {
      for (Index p = cp[c]; p < cp[c + 1]; ++p) {
        if (ri[p] < c) {
          a.values_mut()[p] += 0.25;
          return a;
        }
      }
    }
  }
  return a;
}

SparseOperator curl(const Lattice& lat) {
  SparseOperator c = assemble_curl(lat);
  if (g_fault == "curl") c.values_mut()[0] = -c.values_mut()[0];
  return c;
}

Lattice random_lattice(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<Index> e(4, 8);
  if (dim == 2) return Lattice({e(rng), e(rng)});
  return Lattice({e(rng), e(rng), e(rng)});
}

}  // namespace

void set_fault(const std::string& f) {
  if (!f.empty() && f != "assembly" && f != "curl" && f != "schur") {
    throw Error("unknown fault '" + f + "' (expected assembly, curl or schur)");
  }
  g_fault = f;
}

const std::string& fault() { return g_fault; }

CheckResult check_nonzero_counts(int trials) {
  CheckResult r{"operator nonzero counts", true, "", 0};
  std::mt19937_64 rng(101);
  Index worst = 0;
  for (int t = 0; t < trials; ++t) {
    const Lattice l2 = random_lattice(rng, 2), l3 = random_lattice(rng, 3);
    const Index v2 = l2.site_count(), v3 = l3.site_count();
    const auto c3 = curl(l3);
    const struct {
      const char* what;
      Index got, want;
    } cases[] = {
        {"3D Curl", c3.nonzeros(), 12 * v3},
        {"3D Curl*Curl", c3.transpose().multiply(c3).nonzeros(), 39 * v3},
        {"2D D_A", assemble(WaveOperatorBuilder(l2, Formulation::vector_potential), MaterialMap(l2), 0.7).nonzeros(), 14 * v2},
        {"2D D_G", assemble(WaveOperatorBuilder(l2, Formulation::magnetic), MaterialMap(l2), 0.7).nonzeros(), 5 * v2},
    };
    for (const auto& c : cases) {
      if (c.got != c.want && r.passed) {
        r.passed = false;
        r.detail = std::string(c.what) + " has " + std::to_string(c.got) + " nonzeros, expected " +
                   std::to_string(c.want);
      }
      worst = std::max(worst, std::abs(c.got - c.want));
    }
  }
  if (r.passed) r.detail = std::to_string(trials) + " random extents in [4, 8], all counts exact";
  return r;
}

CheckResult check_adjoint_and_gauge() {
  CheckResult r{"adjointness and gauge", true, "", 0};
  for (const auto& lat : {Lattice({5, 7}), Lattice({8, 6}), Lattice({4, 5, 6}), Lattice({6, 6, 6})}) {
    const auto c = curl(lat);
    if (!c.transpose().identical(assemble_curl_star(lat))) {
      r.passed = false;
      r.detail = "Curl* differs from transpose(Curl) on " + std::to_string(lat.dim()) + "D lattice";
      return r;
    }
    const auto cg = c.multiply(assemble_gradient(lat));
    if (cg.nonzeros() != 0) {
      r.passed = false;
      r.detail = "Curl grad has " + std::to_string(cg.nonzeros()) + " nonzeros on " +
                 std::to_string(lat.dim()) + "D lattice";
      return r;
    }
  }
  r.detail = "exact on 2D and 3D periodic lattices";
  return r;
}

CheckResult check_operator_symmetry() {
  CheckResult r{"operator symmetry", true, "", 0};
  std::mt19937_64 rng(7);
  for (const auto& lat : {Lattice({6, 6}), Lattice({4, 4, 4})}) {
    const auto map = random_map(lat, rng);
    for (const auto f : {Formulation::vector_potential, Formulation::magnetic}) {
      const auto a = assemble(WaveOperatorBuilder(lat, f), map, 0.5);
      if (!a.is_symmetric() || !a.well_formed()) {
        r.passed = false;
        r.detail = to_string(f) + " operator on " + std::to_string(lat.dim()) + "D lattice is not symmetric";
        return r;
      }
    }
  }
  r.detail = "D_A and D_G symmetric and well formed";
  return r;
}

CheckResult check_sparse_vs_dense(int trials) {
  CheckResult r{"sparse vs dense log-determinant", true, "", 0};
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> uw(0.1, 2.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (const auto& lat : {Lattice({8, 8}), Lattice({4, 4, 4})}) {
      const auto map = random_map(lat, rng);
      const double w = uw(rng);
      for (const auto f : {Formulation::vector_potential, Formulation::magnetic}) {
        const double sparse = linalg::factorize(assemble(WaveOperatorBuilder(lat, f), map, w)).logdet();
        const double dense = oracle::dense_logdet(oracle::dense_operator(f, lat, map, w, 1.0));
        worst = std::max(worst, rel_err(sparse, dense));
      }
    }
  }
  r.passed = worst < 1e-8;
  r.detail = "max relative error " + sci(worst) + " (limit 1e-8) over " + std::to_string(4 * trials) + " cases";
  return r;
}

CheckResult check_schur_identity(int trials) {
  CheckResult r{"Schur identity", true, "", 0};
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Index e = 4 + static_cast<Index>(rng() % 11);  // up to 196 faces
    const Lattice lat({e, e});
    const WaveOperatorBuilder b(lat, Formulation::magnetic);
    const auto a = assemble(b, random_map(lat, rng), 0.3 + 0.1 * static_cast<double>(t % 5));
    std::vector<Index> idx(static_cast<std::size_t>(a.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(1 + rng() % std::min<std::size_t>(40, idx.size() - 1));
    const linalg::SchurPlan plan(a.rows(), idx);
    auto sr = linalg::schur_complement(a, plan);
    if (g_fault == "schur") sr.S(0, 0) *= 1.01;
    const double full = oracle::dense_logdet(oracle::DenseMatrix::from_sparse(a));
    worst = std::max(worst, rel_err(sr.logdet_bulk() + linalg::spd_logdet(sr.S), full));
  }
  r.passed = worst < 1e-8;
  r.detail = "max relative error " + sci(worst) + " (limit 1e-8), sizes 16 to 196";
  return r;
}

CheckResult check_three_level_family() {
  CheckResult r{"three-level perturbed path", true, "", 0};
  scenes::ParticlePairScene sc;
  sc.L = 12;
  const Lattice lat = sc.lattice();
  const DielectricModel m = make_constant(8.0);
  sc.particle = m;
  const MaterialMap base = scenes::place_particle(MaterialMap(lat), sc.origin, m);
  const std::vector<Index> ds{2, 3, 4, sc.reference_offset()};
  const WaveOperatorBuilder b(lat, Formulation::magnetic);
  std::vector<std::vector<LinkId>> placements;
  std::vector<Index> z;
  for (const Index d : ds) {
    placements.push_back(scenes::particle_footprint(lat, sc.partner(d)));
    const auto c = b.closure(placements.back());
    z.insert(z.end(), c.begin(), c.end());
  }
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  std::vector<std::vector<Index>> subsets;
  for (const auto& p : placements) {
    std::vector<Index> s;
    for (const Index i : b.closure(p)) s.push_back(std::lower_bound(z.begin(), z.end(), i) - z.begin());
    subsets.push_back(s);
  }
  const linalg::SchurPlan plan(b.dof_count(), z, subsets);
  double worst = 0.0;
  for (const double w : {0.05, 0.3, 1.0, 4.0}) {
    auto sr = linalg::schur_complement(assemble(b, base, w), plan);
    if (g_fault == "schur") sr.S(0, 0) *= 1.01;
    std::vector<linalg::Perturbation> perts;
    for (std::size_t p = 0; p < placements.size(); ++p) {
      perts.push_back({subsets[p], plan.to_local(b.delta(base, placements[p], m, w))});
    }
    const auto fam = linalg::perturbed_logdet_family(sr.S, perts);
    const double ref = oracle::dense_logdet(oracle::dense_DG(lat, scenes::build_pair(sc, lat, ds.back()), w, 1.0));
    for (std::size_t p = 0; p + 1 < ds.size(); ++p) {
      const double dense =
          oracle::dense_logdet(oracle::dense_DG(lat, scenes::build_pair(sc, lat, ds[p]), w, 1.0)) - ref;
      worst = std::max(worst, std::abs(fam.value(p) - fam.value(ds.size() - 1) - dense));
    }
  }
  r.passed = worst < 1e-9;
  r.detail = "max absolute deviation " + sci(worst) + " (limit 1e-9) on a 12 x 12 box";
  return r;
}

CheckResult check_formulation_equivalence(long L, int ng, double tol) {
  CheckResult r{"D_A / D_G equivalence", true, "", 0};
  scenes::ParticlePairScene sc;
  sc.L = L;
  sc.particle = make_constant(8.0);
  const Lattice lat = sc.lattice();
  const auto ref = scenes::build_pair(sc, lat, sc.reference_offset());
  const std::vector<Index> ds{3, 5, 8};
  SceneScale scale;
  scale.separation = 5.0 * std::sqrt(2.0);
  const auto grid = build_grid(select_alpha(scale), ng);
  double worst = 0.0;
  for (const Index d : ds) {
    const auto pair = scenes::build_pair(sc, lat, d);
    FreeEnergyOptions g, a;
    a.formulation = Formulation::vector_potential;
    const double ug = free_energy_difference(pair, ref, grid, g).value;
    const double ua = free_energy_difference(pair, ref, grid, a).value;
    worst = std::max(worst, rel_err(ug, ua));
  }
  r.passed = worst < tol;
  r.detail = "max relative difference " + sci(worst) + " (limit " + sci(tol) + ") at L = " +
             std::to_string(L) + ", N_g = " + std::to_string(ng);
  return r;
}

CheckResult run_check(const std::string& name, const std::function<CheckResult()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = f();
  } catch (const std::exception& e) {
    r.name = name;
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  if (r.name.empty()) r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<std::function<CheckResult()>> validation_suite() {
  return {
      [] { return check_nonzero_counts(); },
      [] { return check_adjoint_and_gauge(); },
      [] { return check_operator_symmetry(); },
      [] { return check_sparse_vs_dense(); },
      [] { return check_schur_identity(); },
      [] { return check_three_level_family(); },
      [] { return check_formulation_equivalence(16, 8, 1e-6); },
  };
}

}  // namespace latcas::cli
