#pragma once

// Zero-temperature frequency integral
//
//   U = int_0^inf dw / 2pi [ln det D1(w) - ln det D2(w)]
//
// on the substitution w = alpha z / (1 - z), 0 < z < 1, with Gauss-Legendre
// nodes on (0, 1).

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "latcas/materials.hpp"
#include "latcas/operators.hpp"

namespace latcas {

struct GaussLegendre {
  std::vector<double> nodes;    // ascending in (0, 1)
  std::vector<double> weights;  // sum to 1
};

/// n-point rule on (0, 1); nodes from Newton iteration on P_n to 1e-14.
GaussLegendre gauss_legendre(int n);

struct FrequencyGrid {
  double alpha = 1.0;
  int ng = 0;
  std::vector<double> z;
  std::vector<double> w;
  std::vector<double> omega;     // alpha z / (1 - z)
  std::vector<double> jacobian;  // alpha / (1 - z)^2
};

FrequencyGrid build_grid(double alpha, int ng);

/// sum_k w_k J_k f_k / 2pi.
double integrate(const FrequencyGrid& grid, std::span<const double> per_node);

/// Integrand weight w_k J_k / 2pi of one node.
double node_weight(const FrequencyGrid& grid, int k);

struct SceneScale {
  double c = 1.0;
  /// Characteristic separation; absent when the scene has none.
  std::optional<double> separation;
  /// Smallest finite resonance frequency of any material, +inf if none.
  double min_resonance = std::numeric_limits<double>::infinity();
};

/// alpha = min(c / d, w0) with dispersion, c / d without; c when no scale.
double select_alpha(const SceneScale& scale);

struct NodeRecord {
  int node = 0;
  double omega = 0.0;
  double delta_logdet = 0.0;  // ln det D1 - ln det D2
};

struct FreeEnergyOptions {
  Formulation formulation = Formulation::magnetic;
  double c = 1.0;
  int threads = 1;
  /// Called after each node completes (from worker threads, serialized).
  std::function<void(const NodeRecord&)> on_node;
  /// Previously computed node values (resume); returning a value skips the node.
  std::function<std::optional<double>(int node)> cached;
};

struct FreeEnergyResult {
  double value = 0.0;
  std::vector<NodeRecord> nodes;  // ordered by node index
  Index factorizations = 0;
};

/// Free energy of cfg1 minus that of cfg2 through one Schur-blocked
/// factorization per node. Exactly antisymmetric in its arguments and exactly
/// zero for identical material assignments.
FreeEnergyResult free_energy_difference(const MaterialMap& cfg1, const MaterialMap& cfg2,
                                        const FrequencyGrid& grid,
                                        const FreeEnergyOptions& opts = {});

/// CSV dump: node,z,omega,weight,delta_logdet.
void write_nodes_csv(std::ostream& os, const FrequencyGrid& grid,
                     std::span<const NodeRecord> nodes);

}  // namespace latcas
