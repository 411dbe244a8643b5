#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latcas/materials.hpp"
#include "latcas/operators.hpp"
#include "latcas/quadrature.hpp"
#include "latcas/scenes.hpp"

namespace latcas::experiments {

// ---- statistics -----------------------------------------------------------

/// Welford mean/variance accumulator.
class OnlineMoments {
 public:
  void add(double x);
  Index count() const { return n_; }
  double mean() const { return mean_; }
  /// Sample variance (n - 1 denominator); 0 below two samples.
  double variance() const;
  double stddev() const;

 private:
  Index n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct FitWindow {
  double rmin = 0.0;
  double rmax = std::numeric_limits<double>::infinity();
};

struct PowerLawFit {
  double exponent = 0.0;
  double amplitude = 0.0;  // signed, y = amplitude * r^exponent
  double exponent_stderr = 0.0;
  Index points = 0;
};

/// Least squares on (ln r, ln |y|) over r in [rmin, rmax].
PowerLawFit fit_power_law(std::span<const double> r, std::span<const double> y,
                          const FitWindow& window = {});

/// round(rmin * factor^k) for k = 0, 1, ... while <= rmax; duplicates dropped.
std::vector<Index> geometric_ladder(double rmin, double rmax, double factor);

std::uint64_t splitmix64(std::uint64_t x);

// ---- checkpoints ----------------------------------------------------------

/// Node-level results keyed by (point, node), appended to a CSV file as they
/// complete so an interrupted run resumes without refactorizing.
class Checkpoint {
 public:
  Checkpoint() = default;
  /// Loads existing entries when `resume`, otherwise truncates the file.
  Checkpoint(std::filesystem::path file, bool resume);

  std::optional<std::vector<double>> get(const std::string& point, int node) const;
  void put(const std::string& point, int node, const std::vector<double>& values);
  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, int>, std::vector<double>> entries_;
};

// ---- shared options -------------------------------------------------------

struct SolverOptions {
  Formulation formulation = Formulation::magnetic;
  double c = 1.0;
  int threads = 1;
  /// Use coordinate nested dissection instead of minimum degree.
  bool nested_dissection = false;
  Checkpoint* checkpoint = nullptr;
  /// Called after each computed (point, node) with its wall time; serialized.
  std::function<void(const std::string& point, int node, double seconds)> on_node;
};

// ---- placement sweep ------------------------------------------------------

/// One factorization per node of `base` with every placement's closure
/// retained; each placement's energy comes from a level-3 effective matrix.
struct PlacementSweep {
  std::vector<double> energies;  // integrated ln det(S + Delta_p), relative to `reference`
  std::vector<std::vector<double>> node_values;  // [node][placement] relative log-dets
  Index factorizations = 0;
};

PlacementSweep run_placement_sweep(const MaterialMap& base,
                                   const std::vector<std::vector<LinkId>>& placements,
                                   const DielectricModel& model, std::size_t reference,
                                   const FrequencyGrid& grid, const SolverOptions& opts,
                                   const std::string& checkpoint_key = {});

// ---- crossover ------------------------------------------------------------

struct SeparationCurve {
  double omega0 = 0.0;      // +inf for the non-dispersive limit
  double alpha = 0.0;
  std::vector<Index> offsets;  // diagonal offsets d
  std::vector<double> r;       // d * sqrt(2)
  std::vector<double> U;
  std::vector<double> U_scaled;  // -U r^5
  Index factorizations = 0;
};

struct CrossoverConfig {
  scenes::ParticlePairScene scene;
  double chi = 7.0;
  std::vector<double> omega0;  // +inf allowed
  std::vector<Index> offsets;
  int ng = 20;
  std::optional<double> alpha;  // override
};

/// Scale used for alpha selection: geometric mean of the extreme separations.
double crossover_separation_scale(const std::vector<Index>& offsets);

std::vector<SeparationCurve> run_crossover_sweep(const CrossoverConfig& cfg,
                                                 const SolverOptions& opts);

// ---- rough surfaces -------------------------------------------------------

struct RoughConfig {
  Index L = 256;
  Index fill = -1;  // default L/2
  DielectricModel material = ConstantDielectric{8.0};
  DielectricModel probe = ConstantDielectric{8.0};
  std::vector<Index> distances;
  Index realizations = 100;
  std::uint64_t base_seed = 1;
  int ng = 20;
  std::optional<double> alpha;
};

struct RealizationResult {
  Index index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> U;  // per distance
  std::vector<Index> heights;
};

struct RoughEnsembleResult {
  std::vector<Index> distances;
  Index reference = 0;
  double alpha = 0.0;
  std::vector<double> mean, sigma, flat, deltaU;
  Index requested = 0;
  Index effective = 0;
  std::vector<RealizationResult> realizations;
  Index factorizations = 0;
};

std::uint64_t realization_seed(std::uint64_t base_seed, Index i);
double rough_alpha(const RoughConfig& cfg);

/// Flat-interface energies with the ensemble's box, grid and ladder.
std::vector<double> run_flat_baseline(const RoughConfig& cfg, const SolverOptions& opts);

RealizationResult run_rough_realization(const RoughConfig& cfg, Index i,
                                        const SolverOptions& opts);

/// Realizations run concurrently (one sequential node loop each) and are
/// reduced in index order.
RoughEnsembleResult run_rough_ensemble(const RoughConfig& cfg, const SolverOptions& opts,
                                       std::function<void(const RealizationResult&)> on_done = {});

// ---- torque ---------------------------------------------------------------

struct TorqueCurve {
  std::vector<double> theta_pi;  // angles in units of pi
  std::vector<double> F_self;    // F_self(theta) - F_self(0)
  std::vector<double> F_both;    // F_both(theta) - F_both(0)
  std::vector<double> U;         // F_both - F_self differences
  std::vector<double> torque_theta_pi;  // midpoints
  std::vector<double> torque;           // -dU/dtheta (per radian)
  double alpha = 0.0;
  Index factorizations = 0;
  /// Angles dropped after a failed factorization, with the reason.
  std::vector<std::pair<double, std::string>> failures;
};

struct TorqueConfig {
  scenes::DiskPairScene scene;
  std::vector<double> angles_pi;  // must contain 0
  int ng = 8;
  std::optional<double> alpha;
};

double torque_alpha(const TorqueConfig& cfg);

/// Two runs (single rotating disk, disk pair), one full factorization per
/// (angle, node, run) sharing a single symbolic analysis.
TorqueCurve run_torque_sweep(const TorqueConfig& cfg, const SolverOptions& opts);

}  // namespace latcas::experiments
