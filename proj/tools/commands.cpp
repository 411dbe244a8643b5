#include "latcas/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>

#include "json.hpp"
#include "latcas/cli/checks.hpp"
#include "latcas/experiments.hpp"
#include "latcas/linalg/cholesky.hpp"
#include "latcas/linalg/symbolic.hpp"
#include "latcas/log.hpp"
#include "latcas/parallel.hpp"

#ifndef LATCAS_VERSION
#define LATCAS_VERSION "unknown"
#endif

namespace latcas::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace latcas::experiments;

namespace {

std::string g17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string tag(double x) {
  if (std::isinf(x)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& meta, const std::string& header)
      : path_(path), os_(path) {
    if (!os_) throw Error("cannot write " + path.string());
    for (const auto& m : meta) os_ << "# " << m << "\n";
    os_ << header << "\n";
  }
  template <class... T>
  void row(const T&... xs) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(xs), first = false), ...);
    os_ << "\n";
  }
  void raw(const std::string& line) { os_ << line << "\n"; }
  const fs::path& path() const { return path_; }

  static std::string cell(double x) { return g17(x); }
  static std::string cell(Index x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

 private:
  fs::path path_;
  std::ofstream os_;
};

struct Run {
  RunConfig cfg;
  fs::path dir;
  int threads = 1;
  json manifest;
  std::unique_ptr<Checkpoint> checkpoint;
  std::vector<json> node_times;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
  std::string stage = "setup";

  SolverOptions solver() {
    SolverOptions o;
    o.formulation = formulation_from_string(cfg.formulation);
    o.c = cfg.c;
    o.threads = threads;
    o.checkpoint = checkpoint.get();
    o.on_node = [this](const std::string& point, int node, double s) {
      node_times.push_back({{"point", point}, {"node", node}, {"seconds", s}});
    };
    return o;
  }

  void warn(const std::string& w) {
    log_warning(w);
    warnings.push_back(w);
  }

  void add(const Csv& c) { outputs.push_back(c.path().filename().string()); }

  std::vector<std::string> meta() const {
    return {"software latcas " + std::string(LATCAS_VERSION),
            "experiment " + to_string(cfg.kind),
            "units: lattice spacing a = 1, hbar = 1, c = " + g17(cfg.c) +
                "; energies are zero-temperature free energies in lattice units",
            "formulation " + cfg.formulation};
  }
};

FitWindow resolve_window(const RunConfig& cfg, const std::vector<double>& r) {
  FitWindow w;
  w.rmin = cfg.fit_rmin;
  if (cfg.fit_rmax > 0.0) {
    w.rmax = cfg.fit_rmax;
  } else if (r.size() >= 3) {
    std::vector<double> s = r;
    std::sort(s.begin(), s.end());
    w.rmax = s[s.size() - 3];
  }
  return w;
}

json fit_json(const std::string& what, std::span<const double> r, std::span<const double> y,
              const FitWindow& w) {
  json j{{"quantity", what}, {"rmin", w.rmin}, {"rmax", w.rmax}};
  try {
    const auto f = fit_power_law(r, y, w);
    j["exponent"] = f.exponent;
    j["stderr"] = f.exponent_stderr;
    j["amplitude"] = f.amplitude;
    j["points"] = f.points;
    j["status"] = "ok";
  } catch (const Error& e) {
    j["status"] = std::string("failed: ") + e.what();
  }
  return j;
}

void write_fits(Run& run, const std::vector<json>& fits) {
  Csv c(run.dir / "fit_summary.csv", run.meta(), "quantity,exponent,stderr,amplitude,points,rmin,rmax,status");
  for (const auto& f : fits) {
    const bool ok = f["status"] == "ok";
    c.row(f["quantity"].get<std::string>(), ok ? f["exponent"].get<double>() : NAN,
          ok ? f["stderr"].get<double>() : NAN, ok ? f["amplitude"].get<double>() : NAN,
          ok ? f["points"].get<Index>() : Index{0}, f["rmin"].get<double>(), f["rmax"].get<double>(),
          "\"" + f["status"].get<std::string>() + "\"");
  }
  run.add(c);
  run.manifest["fits"] = fits;
}

std::vector<Index> default_ladder(Index L) { return geometric_ladder(4.0, static_cast<double>(L) / 5.0, std::numbers::sqrt2); }

void crossover(Run& run) {
  const auto& cfg = run.cfg;
  CrossoverConfig cc;
  cc.scene.L = cfg.L;
  cc.chi = cfg.chi;
  cc.omega0 = cfg.omega0;
  cc.offsets = cfg.offsets.empty() ? default_ladder(cfg.L) : cfg.offsets;
  cc.ng = cfg.ng;
  cc.alpha = cfg.alpha;
  run.stage = "crossover sweep";
  const auto curves = run_crossover_sweep(cc, run.solver());
  run.stage = "output";
  std::vector<json> fits, per;
  Index factorizations = 0;
  for (const auto& cv : curves) {
    auto meta = run.meta();
    meta.push_back("omega0/c = " + g17(cv.omega0) + ", chi = " + g17(cfg.chi) + ", L = " + std::to_string(cfg.L));
    meta.push_back("alpha = " + g17(cv.alpha) + ", N_g = " + std::to_string(cfg.ng));
    meta.push_back("zero of energy: partner at (L/2, L/2); r = d sqrt(2)");
    Csv c(run.dir / ("crossover_w0_" + tag(cv.omega0) + ".csv"), meta, "d,r,U,U_scaled");
    for (std::size_t i = 0; i < cv.r.size(); ++i) c.row(cv.offsets[i], cv.r[i], cv.U[i], cv.U_scaled[i]);
    run.add(c);
    fits.push_back(fit_json("U omega0=" + tag(cv.omega0), cv.r, cv.U, resolve_window(cfg, cv.r)));
    per.push_back({{"omega0", g17(cv.omega0)}, {"alpha", cv.alpha}, {"factorizations", cv.factorizations}});
    factorizations += cv.factorizations;
  }
  write_fits(run, fits);
  run.manifest["curves"] = per;
  run.manifest["offsets"] = cc.offsets;
  run.manifest["factorizations"] = factorizations;
}

RoughConfig rough_config(const RunConfig& cfg) {
  RoughConfig rc;
  rc.L = cfg.L;
  rc.fill = cfg.fill;
  rc.material = make_constant(cfg.epsilon);
  rc.probe = make_constant(cfg.epsilon);
  rc.distances = cfg.distances.empty() ? default_ladder(cfg.L) : cfg.distances;
  rc.realizations = cfg.realizations;
  rc.base_seed = cfg.seed;
  rc.ng = cfg.ng;
  rc.alpha = cfg.alpha;
  return rc;
}

std::vector<std::string> rough_meta(const Run& run, const RoughConfig& rc) {
  auto meta = run.meta();
  const Index fill = rc.fill < 0 ? rc.L / 2 : rc.fill;
  meta.push_back("L = " + std::to_string(rc.L) + ", fill = " + std::to_string(fill) + ", epsilon = " +
                 g17(run.cfg.epsilon));
  meta.push_back("alpha = " + g17(rough_alpha(rc)) + ", N_g = " + std::to_string(rc.ng));
  meta.push_back("zero of energy: probe at r = " + std::to_string((rc.L - fill) / 2) +
                 "; r measured from the fill level at the probe column");
  return meta;
}

void flat(Run& run) {
  const RoughConfig rc = rough_config(run.cfg);
  run.stage = "flat baseline";
  const auto u = run_flat_baseline(rc, run.solver());
  run.stage = "output";
  std::vector<double> r(rc.distances.begin(), rc.distances.end());
  Csv c(run.dir / "flat_baseline.csv", rough_meta(run, rc), "r,U_flat");
  for (std::size_t i = 0; i < r.size(); ++i) c.row(rc.distances[i], u[i]);
  run.add(c);
  write_fits(run, {fit_json("U_flat", r, u, resolve_window(run.cfg, r))});
  run.manifest["distances"] = rc.distances;
  run.manifest["alpha"] = rough_alpha(rc);
}

void rough(Run& run, std::optional<Index> only) {
  const RoughConfig rc = rough_config(run.cfg);
  run.manifest["distances"] = rc.distances;
  run.manifest["alpha"] = rough_alpha(rc);
  run.manifest["base_seed"] = rc.base_seed;
  if (only) {
    if (*only < 0) throw ConfigError("--realization", "must be non-negative");
    run.stage = "realization " + std::to_string(*only);
    auto opts = run.solver();
    const auto r = run_rough_realization(rc, *only, opts);
    run.stage = "output";
    auto meta = rough_meta(run, rc);
    meta.push_back("realization " + std::to_string(r.index) + " seed " + std::to_string(r.seed));
    Csv c(run.dir / ("realization_" + std::to_string(r.index) + ".csv"), meta, "r,U");
    for (std::size_t i = 0; i < r.U.size(); ++i) c.row(rc.distances[i], r.U[i]);
    run.add(c);
    run.manifest["seeds"] = json::array({{{"index", r.index}, {"seed", r.seed}}});
    run.manifest["heights"] = r.heights;
    return;
  }
  run.stage = "rough ensemble";
  const auto res = run_rough_ensemble(rc, run.solver(), [&](const RealizationResult& r) {
    log_info("realization " + std::to_string(r.index) + (r.ok ? " done" : " failed: " + r.error));
  });
  run.stage = "output";
  const auto meta = rough_meta(run, rc);
  std::vector<double> r(rc.distances.begin(), rc.distances.end());
  {
    auto m = meta;
    m.push_back("realizations requested " + std::to_string(res.requested) + ", effective " +
                std::to_string(res.effective));
    Csv c(run.dir / "rough_ensemble.csv", m, "r,mean,sigma,U_flat,deltaU");
    for (std::size_t i = 0; i < r.size(); ++i) c.row(rc.distances[i], res.mean[i], res.sigma[i], res.flat[i], res.deltaU[i]);
    run.add(c);
  }
  {
    std::string header = "index,seed,ok";
    for (const Index d : rc.distances) header += ",U_r" + std::to_string(d);
    Csv c(run.dir / "realizations.csv", meta, header);
    Csv h(run.dir / "heights.csv", meta, "index,seed,heights...");
    Csv s(run.dir / "seeds.csv", meta, "index,seed");
    json seeds = json::array(), failures = json::array();
    for (const auto& x : res.realizations) {
      std::string line = std::to_string(x.index) + "," + std::to_string(x.seed) + "," + (x.ok ? "1" : "0");
      for (std::size_t i = 0; i < rc.distances.size(); ++i) line += "," + (x.ok ? g17(x.U[i]) : std::string("nan"));
      c.raw(line);
      std::string hl = std::to_string(x.index) + "," + std::to_string(x.seed);
      for (const Index v : x.heights) hl += "," + std::to_string(v);
      h.raw(hl);
      s.row(x.index, x.seed);
      seeds.push_back({{"index", x.index}, {"seed", x.seed}});
      if (!x.ok) failures.push_back({{"index", x.index}, {"seed", x.seed}, {"error", x.error}});
    }
    run.add(c);
    run.add(h);
    run.add(s);
    run.manifest["seeds"] = seeds;
    run.manifest["failed_realizations"] = failures;
  }
  std::vector<double> neg_mean;
  for (const double m : res.mean) neg_mean.push_back(m);
  const auto w = resolve_window(run.cfg, r);
  write_fits(run, {fit_json("mean", r, neg_mean, w), fit_json("sigma", r, res.sigma, w),
                   fit_json("U_flat", r, res.flat, w), fit_json("deltaU", r, res.deltaU, w)});
  run.manifest["realizations_requested"] = res.requested;
  run.manifest["realizations_effective"] = res.effective;
  run.manifest["factorizations"] = res.factorizations;
}

void torque(Run& run) {
  const auto& cfg = run.cfg;
  TorqueConfig tc;
  tc.scene.box = cfg.box;
  tc.scene.diameter = cfg.diameter;
  tc.scene.thickness = cfg.thickness;
  tc.scene.gap = cfg.gap;
  tc.scene.eps_a = make_constant(cfg.eps_a);
  tc.scene.eps_b = make_constant(cfg.eps_b);
  tc.angles_pi = cfg.angles_pi;
  tc.ng = cfg.ng;
  tc.alpha = cfg.alpha;
  tc.scene.validate();
  auto opts = run.solver();
  opts.nested_dissection = true;

  run.stage = "resource estimate";
  {
    const Lattice lat = tc.scene.lattice();
    const WaveOperatorBuilder b(lat, opts.formulation, opts.c);
    linalg::AnalysisOptions ao;
    ao.positions = b.dof_positions();
    const auto sym = linalg::analyze(b.pattern(), {}, ao);
    const double bytes = static_cast<double>(sym->factor_nonzeros()) * 8.0;
    const Index count = static_cast<Index>(tc.angles_pi.size()) * tc.ng * 2;
    run.manifest["resources"] = {{"unknowns", b.dof_count()},
                                 {"factor_nonzeros", sym->factor_nonzeros()},
                                 {"factor_bytes", bytes},
                                 {"factor_flops", sym->factor_flops()},
                                 {"factorizations", count}};
    if (bytes > 1.0 * (1 << 30) || cfg.box > 25) {
      std::ostringstream os;
      os << "resource warning: box " << cfg.box << "^3 needs about " << std::setprecision(3)
         << bytes / (1 << 30) << " GiB per factor (" << sym->factor_nonzeros() << " nonzeros, "
         << sym->factor_flops() << " flops) for each of " << count << " factorizations";
      run.warn(os.str());
    }
  }

  run.stage = "torque sweep";
  const auto t = run_torque_sweep(tc, opts);
  run.stage = "output";
  auto meta = run.meta();
  meta.push_back("box " + std::to_string(cfg.box) + "^3, diameter " + g17(cfg.diameter) + ", thickness " +
                 std::to_string(cfg.thickness) + ", gap " + std::to_string(cfg.gap) + ", eps_a " +
                 g17(cfg.eps_a) + ", eps_b " + g17(cfg.eps_b));
  meta.push_back("alpha = " + g17(t.alpha) + ", N_g = " + std::to_string(cfg.ng));
  meta.push_back("U = [F_both(theta) - F_both(0)] - [F_self(theta) - F_self(0)]");
  {
    Csv c(run.dir / "torque_curve.csv", meta, "theta,F_self,F_both,U,theta_pi");
    for (std::size_t i = 0; i < t.U.size(); ++i) {
      c.row(t.theta_pi[i] * std::numbers::pi, t.F_self[i], t.F_both[i], t.U[i], t.theta_pi[i]);
    }
    run.add(c);
  }
  {
    Csv c(run.dir / "torque.csv", meta, "theta_mid,torque,theta_mid_pi");
    for (std::size_t i = 0; i < t.torque.size(); ++i) {
      c.row(t.torque_theta_pi[i] * std::numbers::pi, t.torque[i], t.torque_theta_pi[i]);
    }
    run.add(c);
  }
  json failures = json::array();
  for (const auto& [a, why] : t.failures) failures.push_back({{"theta_pi", a}, {"error", why}});
  run.manifest["failed_angles"] = failures;
  run.manifest["alpha"] = t.alpha;
  run.manifest["factorizations"] = t.factorizations;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  std::string section;
  std::istringstream in(format_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find(" = ");
    j[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  os << j.dump(2) << "\n";
}

}  // namespace

void write_error_record(const std::string& dir, const std::string& stage, const std::string& message) {
  try {
    fs::create_directories(dir);
    write_json(fs::path(dir) / "error.json", {{"status", "error"}, {"stage", stage}, {"message", message}});
  } catch (const std::exception& e) {
    std::cerr << "[error] could not write error record: " << e.what() << "\n";
  }
}

int run_experiment(const RunConfig& cfg, const RunOptions& ro) {
  Run run;
  run.cfg = cfg;
  run.dir = cfg.out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cfg.validate();
    fs::create_directories(run.dir);
    fs::remove(run.dir / "error.json");
    run.threads = cfg.threads > 0 ? cfg.threads : default_threads();
    run.stage = "checkpoint";
    run.checkpoint = std::make_unique<Checkpoint>(run.dir / "nodes.csv", cfg.resume);
    if (cfg.resume) log_info("resuming with " + std::to_string(run.checkpoint->size()) + " stored nodes");
    run.manifest = {{"software", {{"name", "latcas"}, {"version", LATCAS_VERSION}}},
                    {"experiment", to_string(cfg.kind)},
                    {"units", "lattice spacing a = 1, hbar = 1, c = " + g17(cfg.c)},
                    {"config", config_json(cfg)},
                    {"config_text", format_config(cfg)},
                    {"threads", run.threads},
                    {"resumed_nodes", run.checkpoint->size()}};
    if (!ro.config_source.empty()) run.manifest["config_source"] = ro.config_source;
    const Index before = linalg::factorization_count();

    switch (cfg.kind) {
      case ExperimentKind::crossover2d: crossover(run); break;
      case ExperimentKind::rough2d: rough(run, ro.realization); break;
      case ExperimentKind::flat2d: flat(run); break;
      case ExperimentKind::torque3d: torque(run); break;
    }

    run.stage = "manifest";
    run.outputs.push_back("nodes.csv");
    run.manifest["outputs"] = run.outputs;
    run.manifest["warnings"] = run.warnings;
    run.manifest["node_timings"] = run.node_times;
    run.manifest["factorizations_this_process"] = linalg::factorization_count() - before;
    run.manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.manifest["status"] = "ok";
    write_json(run.dir / "manifest.json", run.manifest);
    return kExitOk;
  } catch (const ConfigError& e) {
    log(LogLevel::error, e.what());
    write_error_record(cfg.out, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    log(LogLevel::error, run.stage + ": " + e.what());
    write_error_record(cfg.out, run.stage, e.what());
    return kExitFailure;
  }
}

int run_validate(std::ostream& os, const std::string& fault) {
  set_fault(fault);
  bool all = true;
  os << std::left << std::setw(34) << "check" << std::setw(7) << "result" << std::setw(10) << "seconds"
     << "detail\n";
  for (const auto& f : validation_suite()) {
    const auto r = run_check("check", f);
    all = all && r.passed;
    std::ostringstream secs;
    secs << std::fixed << std::setprecision(2) << r.seconds;
    os << std::left << std::setw(34) << r.name << std::setw(7) << (r.passed ? "PASS" : "FAIL") << std::setw(10)
       << secs.str() << r.detail << "\n";
  }
  set_fault("");
  os << (all ? "all checks passed" : "validation FAILED") << "\n";
  return all ? kExitOk : kExitValidation;
}

}  // namespace latcas::cli
