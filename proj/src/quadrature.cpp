#include "latcas/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>

#include "latcas/linalg/schur.hpp"
#include "latcas/log.hpp"
#include "latcas/parallel.hpp"

namespace latcas {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence (n >= 1).
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error("Gauss-Legendre rule needs at least one node");
  GaussLegendre r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 0.5 * 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root; map [-1, 1] onto (0, 1).
    const auto hi = static_cast<std::size_t>(n - 1 - i), lo = static_cast<std::size_t>(i);
    r.nodes[hi] = 0.5 * (1.0 + x);
    r.nodes[lo] = 0.5 * (1.0 - x);
    r.weights[hi] = w;
    r.weights[lo] = w;
  }
  return r;
}

FrequencyGrid build_grid(double alpha, int ng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("frequency scale alpha must be positive");
  if (ng < 2) throw Error("quadrature needs at least 2 nodes");
  const GaussLegendre gl = gauss_legendre(ng);
  FrequencyGrid g;
  g.alpha = alpha;
  g.ng = ng;
  g.z = gl.nodes;
  g.w = gl.weights;
  for (const double z : g.z) {
    g.omega.push_back(alpha * z / (1.0 - z));
    g.jacobian.push_back(alpha / ((1.0 - z) * (1.0 - z)));
  }
  return g;
}

double node_weight(const FrequencyGrid& grid, int k) {
  return grid.w[static_cast<std::size_t>(k)] * grid.jacobian[static_cast<std::size_t>(k)] /
         (2.0 * std::numbers::pi);
}

double integrate(const FrequencyGrid& grid, std::span<const double> per_node) {
  if (static_cast<int>(per_node.size()) != grid.ng) throw Error("integrand has the wrong node count");
  double sum = 0.0;
  for (int k = 0; k < grid.ng; ++k) sum += grid.w[k] * grid.jacobian[k] * per_node[k];
  return sum / (2.0 * std::numbers::pi);
}

double select_alpha(const SceneScale& s) {
  if (!(s.c > 0.0)) throw Error("speed of light must be positive");
  if (!s.separation || !(*s.separation > 0.0)) {
    log_warning("no characteristic separation for alpha selection; using alpha = c");
    return s.c;
  }
  const double a = s.c / *s.separation;
  return std::isfinite(s.min_resonance) ? std::min(a, s.min_resonance) : a;
}

FreeEnergyResult free_energy_difference(const MaterialMap& cfg1, const MaterialMap& cfg2,
                                        const FrequencyGrid& grid, const FreeEnergyOptions& opts) {
  if (!(cfg1.lattice() == cfg2.lattice())) throw Error("configurations live on different lattices");
  FreeEnergyResult res;
  res.nodes.resize(static_cast<std::size_t>(grid.ng));
  for (int k = 0; k < grid.ng; ++k) res.nodes[k] = {k, grid.omega[k], 0.0};

  const std::vector<LinkId> diff = MaterialMap::differing_links(cfg1, cfg2);
  if (diff.empty()) return res;

  // Canonical base: the map with the smaller model at the first differing
  // link, so swapping the arguments flips the sign bit-exactly.
  const bool swapped = cfg2.model_at(diff.front()) < cfg1.model_at(diff.front());
  const MaterialMap& base = swapped ? cfg2 : cfg1;
  const MaterialMap& other = swapped ? cfg1 : cfg2;

  const WaveOperatorBuilder builder(base.lattice(), opts.formulation, opts.c);
  const linalg::SchurPlan plan(builder.dof_count(), builder.closure(diff));
  const auto sym = linalg::analyze(builder.pattern(), plan);

  std::mutex m;
  std::atomic<Index> count{0};
  parallel_for(grid.ng, opts.threads, [&](Index k) {
    const int node = static_cast<int>(k);
    double dl = 0.0;
    std::optional<double> hit;
    if (opts.cached) hit = opts.cached(node);
    if (hit) {
      dl = *hit;
    } else {
      const double w = grid.omega[k];
      try {
        const SparseOperator a = builder.assemble(base, w);
        linalg::FactorOptions fo;
        fo.keep_factor = false;
        fo.context = "frequency node " + std::to_string(node);
        const auto sr = linalg::schur_complement(a, plan, sym, fo);
        ++count;
        Eigen::MatrixXd s2 = sr.S;
        for (const auto& d : plan.to_local(builder.delta(base, other, diff, w))) {
          s2(d.row, d.col) += d.value;
          if (d.row != d.col) s2(d.col, d.row) += d.value;
        }
        const double base_minus_other = linalg::spd_logdet(sr.S) - linalg::spd_logdet(s2);
        dl = swapped ? -base_minus_other : base_minus_other;
      } catch (const Error& e) {
        throw Error("frequency node " + std::to_string(node) + " (omega = " + std::to_string(w) +
                    "): " + e.what());
      }
    }
    std::lock_guard lock(m);
    res.nodes[k].delta_logdet = dl;
    if (opts.on_node) opts.on_node(res.nodes[k]);
  });
  std::vector<double> vals(static_cast<std::size_t>(grid.ng));
  for (int k = 0; k < grid.ng; ++k) vals[k] = res.nodes[k].delta_logdet;
  res.value = integrate(grid, vals);
  res.factorizations = count.load();
  return res;
}

void write_nodes_csv(std::ostream& os, const FrequencyGrid& grid,
                     std::span<const NodeRecord> nodes) {
  os << "# alpha=" << std::setprecision(17) << grid.alpha << " ng=" << grid.ng << "\n";
  os << "node,z,omega,weight,delta_logdet\n";
  for (const auto& r : nodes) {
    os << r.node << "," << grid.z[r.node] << "," << r.omega << "," << node_weight(grid, r.node)
       << "," << r.delta_logdet << "\n";
  }
}

}  // namespace latcas
