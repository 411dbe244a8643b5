#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "latcas/cli/checks.hpp"
#include "latcas/cli/commands.hpp"
#include "latcas/cli/config.hpp"
#include "latcas/log.hpp"

using namespace latcas;
using namespace latcas::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("latcas_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

RunConfig small_crossover(const fs::path& out) {
  RunConfig c;
  c.kind = ExperimentKind::crossover2d;
  c.L = 32;
  c.omega0 = {std::numeric_limits<double>::infinity(), 0.3};
  c.offsets = {2, 3, 4, 5};
  c.ng = 6;
  c.fit_rmin = 2.0;
  c.threads = 1;
  c.out = out.string();
  return c;
}

}  // namespace

TEST_CASE("config round trip preserves every field") {
  RunConfig c;
  c.kind = ExperimentKind::rough2d;
  c.formulation = "vector_potential";
  c.c = 2.5;
  c.L = 128;
  c.box = 31;
  c.chi = 3.25;
  c.omega0 = {0.1, std::numeric_limits<double>::infinity(), 1.0 / 3.0};
  c.epsilon = 6.5;
  c.eps_a = 2.0;
  c.eps_b = 12.0;
  c.alpha = 0.123456789012345;
  c.ng = 17;
  c.offsets = {3, 5, 9};
  c.distances = {4, 8};
  c.angles_pi = {0.0, 0.1, 0.7};
  c.diameter = 12.5;
  c.thickness = 3;
  c.gap = 4;
  c.fill = 40;
  c.realizations = 7;
  c.seed = 18446744073709551557ULL;
  c.fit_rmin = 5.0;
  c.fit_rmax = 30.0;
  c.out = "some/dir";
  c.resume = true;
  c.threads = 3;
  CHECK(parse_config(format_config(c)) == c);
  CHECK(parse_config(format_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config errors name the key") {
  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("[run]\nkind = crossover2d\n[quadrature]\nng = 8\n") == "lattice.L");
  CHECK(key_of("[run]\nkind = torque3d\n[quadrature]\nng = 8\n") == "lattice.box");
  CHECK(key_of("[run]\nkind = flat2d\n[lattice]\nL = 64\n") == "quadrature.ng");
  CHECK(key_of("[run]\nkind = flat2d\nbogus = 1\n") == "run.bogus");
  CHECK(key_of("[run]\nkind = warp\n") == "run.kind");
  CHECK(key_of("[run]\nkind = flat2d\n[lattice]\nL = 64\nL = 65\n[quadrature]\nng = 8\n") == "lattice.L");
  CHECK(key_of("[run]\nkind = flat2d\n[lattice]\nL = sixty\n[quadrature]\nng = 8\n") == "lattice.L");
  CHECK(key_of("[run]\nkind = flat2d\n[lattice]\nL = 64\n[quadrature]\nng = 8\nalpha = -1\n") ==
        "quadrature.alpha");
  CHECK(key_of("[run]\nkind = flat2d\n[lattice]\nL = 64\n[quadrature]\nng = 8\n") == "<none>");
}

TEST_CASE("crossover run writes curves, fits and a manifest") {
  set_log_level(LogLevel::warning);
  const auto dir = scratch("crossover");
  REQUIRE(run_experiment(small_crossover(dir)) == kExitOk);
  for (const char* f : {"crossover_w0_inf.csv", "crossover_w0_0.3.csv", "fit_summary.csv", "manifest.json",
                        "nodes.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto m = read_json(dir / "manifest.json");
  CHECK(m["status"] == "ok");
  CHECK(m["factorizations"].get<long>() > 0);
  CHECK(m["config"]["run"]["kind"] == "crossover2d");
  CHECK(slurp(dir / "crossover_w0_inf.csv").find("d,r,U,U_scaled") != std::string::npos);
  CHECK(!fs::exists(dir / "error.json"));
}

TEST_CASE("resume reuses every node and reproduces the output") {
  set_log_level(LogLevel::warning);
  const auto dir = scratch("resume");
  auto cfg = small_crossover(dir);
  REQUIRE(run_experiment(cfg) == kExitOk);
  const auto first = slurp(dir / "crossover_w0_0.3.csv");
  cfg.resume = true;
  REQUIRE(run_experiment(cfg) == kExitOk);
  CHECK(slurp(dir / "crossover_w0_0.3.csv") == first);
  CHECK(read_json(dir / "manifest.json")["factorizations_this_process"].get<long>() == 0);
}

TEST_CASE("single realization rerun matches the ensemble row") {
  set_log_level(LogLevel::warning);
  const auto dir = scratch("rough");
  RunConfig c;
  c.kind = ExperimentKind::rough2d;
  c.L = 24;
  c.distances = {2, 3, 4};
  c.realizations = 3;
  c.ng = 4;
  c.fit_rmin = 2.0;
  c.out = dir.string();
  REQUIRE(run_experiment(c) == kExitOk);
  const auto ens = slurp(dir / "realizations.csv");
  c.out = (dir / "single").string();
  RunOptions o;
  o.realization = 1;
  REQUIRE(run_experiment(c, o) == kExitOk);
  const auto one = slurp(dir / "single" / "realization_1.csv");
  // U at r = 2 from both files
  std::istringstream es(ens), os(one);
  std::string line, row1, u2;
  while (std::getline(es, line)) {
    if (line.rfind("1,", 0) == 0) row1 = line;
  }
  while (std::getline(os, line)) {
    if (line.rfind("2,", 0) == 0) u2 = line.substr(2);
  }
  REQUIRE(!row1.empty());
  REQUIRE(!u2.empty());
  CHECK(row1.find("," + u2 + ",") != std::string::npos);
}

TEST_CASE("failures leave an error record and a nonzero exit code") {
  set_log_level(LogLevel::quiet);
  const auto dir = scratch("failure");
  RunConfig c;
  c.kind = ExperimentKind::torque3d;
  c.box = 10;
  c.diameter = 16.0;
  c.angles_pi = {0.0, 0.5};
  c.ng = 2;
  c.out = dir.string();
  CHECK(run_experiment(c) == kExitFailure);
  const auto e = read_json(dir / "error.json");
  CHECK(e["status"] == "error");
  CHECK(!e["message"].get<std::string>().empty());

  c.ng = 1;
  CHECK(run_experiment(c) == kExitConfig);
  CHECK(read_json(dir / "error.json")["stage"] == "config");
  set_log_level(LogLevel::info);
}

TEST_CASE("validate fails under each injected fault") {
  std::ostringstream clean;
  CHECK(run_validate(clean) == kExitOk);
  for (const char* f : {"assembly", "curl", "schur"}) {
    std::ostringstream os;
    CHECK(run_validate(os, f) == kExitValidation);
    CHECK(os.str().find("FAIL") != std::string::npos);
  }
  CHECK(fault().empty());
}
