#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "latcas/cli/config.hpp"

namespace latcas::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFailure = 3;
inline constexpr int kExitValidation = 4;

struct RunOptions {
  /// rough2d only: rerun a single realization by index.
  std::optional<Index> realization;
  /// Full text of the config as given (echoed in the manifest).
  std::string config_source;
};

/// Runs the experiment named by cfg.kind and writes its CSV files and
/// manifest.json into cfg.out. On failure writes error.json and returns a
/// nonzero code instead of throwing.
int run_experiment(const RunConfig& cfg, const RunOptions& opts = {});

/// Oracle cross-check table; nonzero when any check fails.
int run_validate(std::ostream& os, const std::string& fault = {});

/// Writes {"status": "error", "stage", "message"} to dir/error.json.
void write_error_record(const std::string& dir, const std::string& stage, const std::string& message);

}  // namespace latcas::cli
