#pragma once

// Run configuration: sections of `key = value` lines.
//
//   # comment
//   [run]
//   kind = crossover2d
//
// Lists are comma separated; `inf` is accepted wherever a frequency is; the
// word `auto` leaves alpha and the separation ladders to the program.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "latcas/error.hpp"

namespace latcas::cli {

enum class ExperimentKind { torque3d, crossover2d, rough2d, flat2d };

std::string to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& s);

struct RunConfig {
  ExperimentKind kind = ExperimentKind::crossover2d;
  std::string formulation = "magnetic";
  double c = 1.0;

  // 2D box edge and 3D box edge
  Index L = 256;
  Index box = 25;

  // materials
  double chi = 7.0;                  // particle single pole
  std::vector<double> omega0 = {std::numeric_limits<double>::infinity()};
  double epsilon = 8.0;              // surface material and probe
  double eps_a = 5.0;
  double eps_b = 10.0;

  // quadrature
  std::optional<double> alpha;       // auto when empty
  int ng = 20;

  // geometry
  std::vector<Index> offsets;        // crossover diagonal offsets; auto when empty
  std::vector<Index> distances;      // probe distances; auto when empty
  std::vector<double> angles_pi = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0, 1.125};
  double diameter = 16.0;
  Index thickness = 2;
  Index gap = 2;
  Index fill = -1;                   // L/2 when negative

  // ensemble
  Index realizations = 100;
  std::uint64_t seed = 1;

  // fit window; rmax <= 0 means "all but the largest two points"
  double fit_rmin = 6.0;
  double fit_rmax = 0.0;

  std::string out = "out";
  bool resume = false;
  int threads = 0;  // 0 = hardware concurrency

  bool operator==(const RunConfig&) const = default;

  /// Validates ranges; throws ConfigError naming the offending key.
  void validate() const;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses the text form. Required: run.kind, and the box of that kind
/// (lattice.L for 2D kinds, lattice.box for torque3d), plus quadrature.ng.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Text form that parses back to an equal RunConfig.
std::string format_config(const RunConfig& cfg);

/// Parse helpers shared with the command line.
double parse_real(const std::string& key, const std::string& v);
std::optional<double> parse_alpha(const std::string& key, const std::string& v);

}  // namespace latcas::cli
