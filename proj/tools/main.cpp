#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "latcas/cli/commands.hpp"
#include "latcas/cli/config.hpp"
#include "latcas/log.hpp"

using namespace latcas;
using namespace latcas::cli;

namespace {

struct Overrides {
  std::string out;
  int threads = -1;
  bool resume = false;
  int ng = 0;
  std::string alpha;
  long long seed = -1;
  long long realization = -1;
};

void apply(RunConfig& cfg, const Overrides& o) {
  if (!o.out.empty()) cfg.out = o.out;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (o.resume) cfg.resume = true;
  if (o.ng > 0) cfg.ng = o.ng;
  if (!o.alpha.empty()) cfg.alpha = parse_alpha("--alpha", o.alpha);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cli::ConfigError("--config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice Casimir free energies by sparse log-determinants"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Overrides ov;
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_flag("-v,--verbose", verbose, "Print per-node progress");

  auto add_common = [&](CLI::App* s) {
    s->add_option("-c,--config", config_path, "Run configuration file")->required();
    s->add_option("-o,--out", ov.out, "Output directory (overrides output.dir)");
    s->add_option("-j,--threads", ov.threads, "Worker threads, 0 for all cores");
    s->add_flag("--resume", ov.resume, "Reuse node values stored in the output directory");
    s->add_option("--ng", ov.ng, "Quadrature nodes");
    s->add_option("--alpha", ov.alpha, "Quadrature scale or 'auto'");
    s->add_option("--seed", ov.seed, "Base seed for rough ensembles");
  };

  auto* run = app.add_subcommand("run", "Run the experiment named in the config");
  add_common(run);
  run->add_option("--realization", ov.realization, "rough2d: rerun one realization by index");

  auto* show = app.add_subcommand("show-config", "Print the effective configuration");
  add_common(show);

  std::string fault;
  auto* validate = app.add_subcommand("validate", "Cross-check the sparse engine against the dense oracle");
  validate->add_option("--fault", fault, "Corrupt one stage (assembly, curl, schur) to exercise the checks")
      ->check(CLI::IsMember({"", "assembly", "curl", "schur"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  set_log_level(quiet ? LogLevel::error : verbose ? LogLevel::debug : LogLevel::info);

  if (*validate) return run_validate(std::cout, fault);

  RunConfig cfg;
  std::string text;
  try {
    text = slurp(config_path);
    cfg = parse_config(text);
    apply(cfg, ov);
    cfg.validate();
  } catch (const cli::ConfigError& e) {
    std::cerr << "[error] " << e.what() << "\n";
    if (!ov.out.empty()) write_error_record(ov.out, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return kExitConfig;
  }

  if (*show) {
    std::cout << format_config(cfg);
    return kExitOk;
  }

  RunOptions ro;
  ro.config_source = text;
  if (ov.realization >= 0) {
    if (cfg.kind != ExperimentKind::rough2d) {
      std::cerr << "[error] --realization applies to rough2d only\n";
      return kExitConfig;
    }
    ro.realization = static_cast<Index>(ov.realization);
  }
  return run_experiment(cfg, ro);
}
