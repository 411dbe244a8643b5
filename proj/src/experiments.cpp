#include "latcas/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "latcas/linalg/schur.hpp"
#include "latcas/linalg/symbolic.hpp"
#include "latcas/log.hpp"
#include "latcas/parallel.hpp"

namespace latcas::experiments {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::mutex node_hook_mutex;

void report_node(const SolverOptions& opts, const std::string& key, int node, Clock::time_point t0) {
  if (!opts.on_node) return;
  std::lock_guard lock(node_hook_mutex);
  opts.on_node(key, node, seconds_since(t0));
}

}  // namespace

void OnlineMoments::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double OnlineMoments::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double OnlineMoments::stddev() const { return std::sqrt(std::max(0.0, variance())); }

PowerLawFit fit_power_law(std::span<const double> r, std::span<const double> y,
                          const FitWindow& window) {
  if (r.size() != y.size()) throw Error("power-law fit needs equally many r and y values");
  if (!(window.rmin <= window.rmax)) throw Error("degenerate fit window");
  std::vector<double> x, v;
  int sign = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < window.rmin || r[i] > window.rmax) continue;
    if (!(r[i] > 0.0)) throw Error("power-law fit needs positive r");
    if (y[i] == 0.0 || !std::isfinite(y[i])) throw Error("power-law fit needs finite nonzero y");
    const int s = y[i] > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) throw Error("power-law fit data change sign inside the window");
    sign = s;
    x.push_back(std::log(r[i]));
    v.push_back(std::log(std::abs(y[i])));
  }
  const auto n = static_cast<Index>(x.size());
  if (n < 3) throw Error("power-law fit needs at least 3 points in the window");
  double mx = 0.0, mv = 0.0;
  for (Index i = 0; i < n; ++i) {
    mx += x[i];
    mv += v[i];
  }
  mx /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double sxx = 0.0, sxv = 0.0;
  for (Index i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxv += (x[i] - mx) * (v[i] - mv);
  }
  if (!(sxx > 0.0)) throw Error("degenerate fit window: all r equal");
  PowerLawFit fit;
  fit.exponent = sxv / sxx;
  const double intercept = mv - fit.exponent * mx;
  fit.amplitude = sign * std::exp(intercept);
  double ssr = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double e = v[i] - intercept - fit.exponent * x[i];
    ssr += e * e;
  }
  fit.exponent_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  fit.points = n;
  return fit;
}

std::vector<Index> geometric_ladder(double rmin, double rmax, double factor) {
  if (!(rmin > 0.0) || !(factor > 1.0)) throw Error("ladder needs rmin > 0 and factor > 1");
  std::vector<Index> out;
  for (double r = rmin; r <= rmax * (1.0 + 1e-12); r *= factor) {
    const auto k = static_cast<Index>(std::llround(r));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// ---- checkpoint -----------------------------------------------------------

Checkpoint::Checkpoint(std::filesystem::path file, bool resume) : file_(std::move(file)) {
  if (resume && std::filesystem::exists(file_)) {
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ss(line);
      std::string point, field;
      if (!std::getline(ss, point, ',') || !std::getline(ss, field, ',')) continue;
      std::vector<double> vals;
      try {
        const int node = std::stoi(field);
        while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
        entries_[{point, node}] = std::move(vals);
      } catch (const std::exception&) {
        // torn final line from an interrupted write
      }
    }
    return;
  }
  if (!file_.empty()) {
    std::ofstream out(file_, std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint file " + file_.string());
  }
}

std::optional<std::vector<double>> Checkpoint::get(const std::string& point, int node) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find({point, node});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Checkpoint::put(const std::string& point, int node, const std::vector<double>& values) {
  if (point.find(',') != std::string::npos) throw Error("checkpoint key contains a comma");
  std::lock_guard lock(mutex_);
  entries_[{point, node}] = values;
  if (file_.empty()) return;
  std::ofstream out(file_, std::ios::app);
  if (!out) throw Error("cannot append to checkpoint file " + file_.string());
  out << point << ',' << node;
  char buf[32];
  for (const double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  }
  out << '\n';
  out.flush();
}

std::size_t Checkpoint::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

// ---- placement sweep ------------------------------------------------------

PlacementSweep run_placement_sweep(const MaterialMap& base,
                                   const std::vector<std::vector<LinkId>>& placements,
                                   const DielectricModel& model, std::size_t reference,
                                   const FrequencyGrid& grid, const SolverOptions& opts,
                                   const std::string& checkpoint_key) {
  if (placements.empty()) throw Error("placement sweep needs at least one placement");
  if (reference >= placements.size()) throw Error("reference placement out of range");
  const WaveOperatorBuilder builder(base.lattice(), opts.formulation, opts.c);

  std::vector<std::vector<Index>> closures;
  std::vector<Index> z;
  for (const auto& links : placements) {
    closures.push_back(builder.closure(links));
    z.insert(z.end(), closures.back().begin(), closures.back().end());
  }
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  std::vector<std::vector<Index>> subsets;
  for (const auto& c : closures) {
    std::vector<Index> s;
    for (const Index i : c) s.push_back(std::lower_bound(z.begin(), z.end(), i) - z.begin());
    subsets.push_back(std::move(s));
  }
  const linalg::SchurPlan plan(builder.dof_count(), z, subsets);
  const auto sym = linalg::analyze(builder.pattern(), plan);

  const auto np = placements.size();
  PlacementSweep out;
  out.node_values.assign(static_cast<std::size_t>(grid.ng), {});
  std::atomic<Index> count{0};
  parallel_for(grid.ng, opts.threads, [&](Index k) {
    const int node = static_cast<int>(k);
    if (opts.checkpoint && !checkpoint_key.empty()) {
      if (auto hit = opts.checkpoint->get(checkpoint_key, node); hit && hit->size() == np) {
        out.node_values[k] = std::move(*hit);
        return;
      }
    }
    const double w = grid.omega[k];
    const auto t0 = Clock::now();
    try {
      linalg::FactorOptions fo = linalg::schur_factor_options();
      fo.context = "frequency node " + std::to_string(node);
      const auto sr = linalg::schur_complement(builder.assemble(base, w), plan, sym, fo);
      ++count;
      std::vector<linalg::Perturbation> perts;
      perts.reserve(np);
      for (std::size_t p = 0; p < np; ++p) {
        perts.push_back({subsets[p], plan.to_local(builder.delta(base, placements[p], model, w))});
      }
      auto fam = linalg::perturbed_logdet_family(sr.S, perts);
      if (opts.checkpoint && !checkpoint_key.empty()) opts.checkpoint->put(checkpoint_key, node, fam.relative);
      out.node_values[k] = std::move(fam.relative);
      report_node(opts, checkpoint_key, node, t0);
    } catch (const Error& e) {
      throw Error("frequency node " + std::to_string(node) + " (omega = " + std::to_string(w) +
                  "): " + e.what());
    }
  });

  out.factorizations = count.load();
  out.energies.resize(np);
  std::vector<double> vals(static_cast<std::size_t>(grid.ng));
  for (std::size_t p = 0; p < np; ++p) {
    for (int k = 0; k < grid.ng; ++k) vals[k] = out.node_values[k][p] - out.node_values[k][reference];
    out.energies[p] = integrate(grid, vals);
  }
  return out;
}

// ---- crossover ------------------------------------------------------------

double crossover_separation_scale(const std::vector<Index>& offsets) {
  if (offsets.empty()) throw Error("separation list is empty");
  const auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.end());
  return std::sqrt(static_cast<double>(*lo) * static_cast<double>(*hi)) * std::numbers::sqrt2;
}

namespace {

std::string format_key(const char* prefix, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.17g", prefix, v);
  return buf;
}

}  // namespace

std::vector<SeparationCurve> run_crossover_sweep(const CrossoverConfig& cfg,
                                                 const SolverOptions& opts) {
  const auto& sc = cfg.scene;
  if (sc.L < 8) throw Error("pair box too small");
  if (cfg.offsets.empty()) throw Error("separation list is empty");
  if (cfg.omega0.empty()) throw Error("omega0 list is empty");
  const Index ref = sc.reference_offset();
  for (const Index d : cfg.offsets) {
    if (d < 2 || d > sc.L - 2) throw Error("diagonal offset " + std::to_string(d) + " outside the box");
    if (d == ref) throw Error("offset coincides with the reference separation");
  }
  const Lattice lat = sc.lattice();
  std::vector<SeparationCurve> curves;
  for (const double w0 : cfg.omega0) {
    const DielectricModel model = make_single_pole(cfg.chi, w0);
    const MaterialMap base = scenes::place_particle(MaterialMap(lat), sc.origin, model);
    std::vector<std::vector<LinkId>> placements;
    for (const Index d : cfg.offsets) placements.push_back(scenes::particle_footprint(lat, sc.partner(d)));
    placements.push_back(scenes::particle_footprint(lat, sc.partner(ref)));

    SceneScale scale;
    scale.c = opts.c;
    scale.separation = crossover_separation_scale(cfg.offsets);
    scale.min_resonance = resonance(model);
    SeparationCurve curve;
    curve.omega0 = w0;
    curve.alpha = cfg.alpha ? *cfg.alpha : select_alpha(scale);
    const FrequencyGrid grid = build_grid(curve.alpha, cfg.ng);
    log_info("crossover omega0=" + std::to_string(w0) + " alpha=" + std::to_string(curve.alpha));
    const auto sweep = run_placement_sweep(base, placements, model, placements.size() - 1, grid,
                                           opts, format_key("crossover:w0=", w0));
    curve.factorizations = sweep.factorizations;
    for (std::size_t i = 0; i < cfg.offsets.size(); ++i) {
      const double r = static_cast<double>(cfg.offsets[i]) * std::numbers::sqrt2;
      curve.offsets.push_back(cfg.offsets[i]);
      curve.r.push_back(r);
      curve.U.push_back(sweep.energies[i]);
      curve.U_scaled.push_back(-sweep.energies[i] * std::pow(r, 5));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

// ---- rough surfaces -------------------------------------------------------

std::uint64_t realization_seed(std::uint64_t base_seed, Index i) {
  return splitmix64(base_seed + static_cast<std::uint64_t>(i));
}

namespace {

Index fill_of(const RoughConfig& cfg) { return cfg.fill < 0 ? cfg.L / 2 : cfg.fill; }

void check_rough(const RoughConfig& cfg, const scenes::RoughSurfaceScene& s) {
  if (cfg.distances.empty()) throw Error("probe distance ladder is empty");
  const Index ref = scenes::reference_probe_distance(s);
  for (const Index r : cfg.distances) {
    if (r == ref) throw Error("probe distance coincides with the reference distance");
    (void)scenes::probe_plaquette(s, r);
  }
}

std::vector<double> surface_energies(const RoughConfig& cfg, const scenes::RoughSurfaceScene& s,
                                     const FrequencyGrid& grid, const SolverOptions& opts,
                                     const std::string& key, Index* factorizations) {
  const Lattice lat = s.lattice();
  const MaterialMap base = scenes::build_surface(s, lat);
  std::vector<std::vector<LinkId>> placements;
  auto add = [&](Index r) {
    // The footprint must be vacuum in the bare surface.
    const Coord at = scenes::probe_plaquette(s, r);
    (void)scenes::place_particle(base, at, cfg.probe);
    placements.push_back(scenes::particle_footprint(lat, at));
  };
  for (const Index r : cfg.distances) add(r);
  add(scenes::reference_probe_distance(s));
  auto sweep = run_placement_sweep(base, placements, cfg.probe, placements.size() - 1, grid, opts, key);
  if (factorizations) *factorizations += sweep.factorizations;
  sweep.energies.pop_back();
  return sweep.energies;
}

}  // namespace

double rough_alpha(const RoughConfig& cfg) {
  if (cfg.alpha) return *cfg.alpha;
  if (cfg.distances.empty()) throw Error("probe distance ladder is empty");
  const auto [lo, hi] = std::minmax_element(cfg.distances.begin(), cfg.distances.end());
  SceneScale scale;
  scale.separation = std::sqrt(static_cast<double>(*lo) * static_cast<double>(*hi));
  scale.min_resonance = std::min(resonance(cfg.material), resonance(cfg.probe));
  return select_alpha(scale);
}

std::vector<double> run_flat_baseline(const RoughConfig& cfg, const SolverOptions& opts) {
  const auto s = scenes::flat_surface(cfg.L, cfg.material, fill_of(cfg));
  check_rough(cfg, s);
  const FrequencyGrid grid = build_grid(rough_alpha(cfg), cfg.ng);
  return surface_energies(cfg, s, grid, opts, "flat", nullptr);
}

RealizationResult run_rough_realization(const RoughConfig& cfg, Index i, const SolverOptions& opts) {
  RealizationResult res;
  res.index = i;
  res.seed = realization_seed(cfg.base_seed, i);
  const auto s = scenes::generate_rough_surface(cfg.L, res.seed, cfg.material, fill_of(cfg));
  check_rough(cfg, s);
  res.heights = s.heights;
  const FrequencyGrid grid = build_grid(rough_alpha(cfg), cfg.ng);
  res.U = surface_energies(cfg, s, grid, opts, "rough:" + std::to_string(i), nullptr);
  res.ok = true;
  return res;
}

RoughEnsembleResult run_rough_ensemble(const RoughConfig& cfg, const SolverOptions& opts,
                                       std::function<void(const RealizationResult&)> on_done) {
  if (cfg.realizations < 2) throw Error("rough ensemble needs at least 2 realizations");
  check_rough(cfg, scenes::flat_surface(cfg.L, cfg.material, fill_of(cfg)));
  const Index before = linalg::factorization_count();

  RoughEnsembleResult out;
  out.distances = cfg.distances;
  out.reference = (cfg.L - fill_of(cfg)) / 2;
  out.alpha = rough_alpha(cfg);
  out.requested = cfg.realizations;
  out.flat = run_flat_baseline(cfg, opts);

  SolverOptions inner = opts;
  inner.threads = 1;
  out.realizations.resize(static_cast<std::size_t>(cfg.realizations));
  std::mutex m;
  parallel_for(cfg.realizations, opts.threads, [&](Index i) {
    RealizationResult r;
    try {
      r = run_rough_realization(cfg, i, inner);
    } catch (const Error& e) {
      r.index = i;
      r.seed = realization_seed(cfg.base_seed, i);
      r.ok = false;
      r.error = e.what();
      log_warning("realization " + std::to_string(i) + " skipped: " + r.error);
    }
    std::lock_guard lock(m);
    if (on_done) on_done(r);
    out.realizations[i] = std::move(r);
  });

  const auto nd = cfg.distances.size();
  std::vector<OnlineMoments> acc(nd);
  for (const auto& r : out.realizations) {
    if (!r.ok) continue;
    ++out.effective;
    for (std::size_t j = 0; j < nd; ++j) acc[j].add(r.U[j]);
  }
  if (out.effective < 2) throw Error("fewer than 2 realizations succeeded");
  for (std::size_t j = 0; j < nd; ++j) {
    out.mean.push_back(acc[j].mean());
    out.sigma.push_back(acc[j].stddev());
    out.deltaU.push_back(acc[j].mean() - out.flat[j]);
  }
  out.factorizations = linalg::factorization_count() - before;
  return out;
}

// ---- torque ---------------------------------------------------------------

double torque_alpha(const TorqueConfig& cfg) {
  if (cfg.alpha) return *cfg.alpha;
  SceneScale scale;
  scale.separation = static_cast<double>(cfg.scene.gap + cfg.scene.thickness);
  scale.min_resonance = std::min(resonance(cfg.scene.eps_a), resonance(cfg.scene.eps_b));
  return select_alpha(scale);
}

TorqueCurve run_torque_sweep(const TorqueConfig& cfg, const SolverOptions& opts) {
  cfg.scene.validate();
  if (cfg.angles_pi.empty() || cfg.angles_pi.front() != 0.0) {
    throw Error("angle list must start at 0");
  }
  if (!std::is_sorted(cfg.angles_pi.begin(), cfg.angles_pi.end()) ||
      std::adjacent_find(cfg.angles_pi.begin(), cfg.angles_pi.end()) != cfg.angles_pi.end()) {
    throw Error("angles must be strictly increasing");
  }
  const Lattice lat = cfg.scene.lattice();
  const WaveOperatorBuilder builder(lat, opts.formulation, opts.c);
  linalg::AnalysisOptions ao;
  if (opts.nested_dissection) ao.positions = builder.dof_positions();
  const auto sym = linalg::analyze(builder.pattern(), {}, ao);
  log_info("torque analysis: factor nonzeros " + std::to_string(sym->factor_nonzeros()));

  TorqueCurve out;
  out.alpha = torque_alpha(cfg);
  const FrequencyGrid grid = build_grid(out.alpha, cfg.ng);
  const auto na = static_cast<Index>(cfg.angles_pi.size());
  const Index ng = grid.ng;

  // Work item: (angle, run, node); run 0 is the single rotating disk.
  std::vector<double> logdet(static_cast<std::size_t>(na * 2 * ng), 0.0);
  std::vector<std::string> failed(static_cast<std::size_t>(na));
  std::atomic<Index> count{0};
  std::mutex m;
  parallel_for(na * 2 * ng, opts.threads, [&](Index item) {
    const Index a = item / (2 * ng);
    const int run = static_cast<int>((item / ng) % 2);
    const int node = static_cast<int>(item % ng);
    {
      std::lock_guard lock(m);
      if (!failed[a].empty()) return;
    }
    const std::string key = format_key(run == 0 ? "torque:self:theta_pi=" : "torque:both:theta_pi=",
                                       cfg.angles_pi[a]);
    if (opts.checkpoint) {
      if (auto hit = opts.checkpoint->get(key, node); hit && hit->size() == 1) {
        logdet[item] = hit->front();
        return;
      }
    }
    scenes::DiskPairScene s = cfg.scene;
    s.set_theta_pi(cfg.angles_pi[a]);
    const MaterialMap map = run == 0 ? scenes::build_single_disk(s, lat) : scenes::build_disk_pair(s, lat);
    const auto t0 = Clock::now();
    try {
      linalg::FactorOptions fo;
      fo.keep_factor = false;
      fo.context = key + " node " + std::to_string(node);
      const auto f = linalg::factorize(builder.assemble(map, grid.omega[node]), sym, fo);
      ++count;
      logdet[item] = f.logdet();
      if (opts.checkpoint) opts.checkpoint->put(key, node, {f.logdet()});
      report_node(opts, key, node, t0);
    } catch (const Error& e) {
      std::lock_guard lock(m);
      if (a == 0) throw;
      failed[a] = "node " + std::to_string(node) + ": " + e.what();
    }
  });
  out.factorizations = count.load();

  auto at = [&](Index a, int run, int node) { return logdet[static_cast<std::size_t>((a * 2 + run) * ng + node)]; };
  std::vector<double> ds(static_cast<std::size_t>(ng)), db(static_cast<std::size_t>(ng));
  for (Index a = 0; a < na; ++a) {
    if (!failed[a].empty()) {
      log_warning("angle " + std::to_string(cfg.angles_pi[a]) + " pi dropped: " + failed[a]);
      out.failures.emplace_back(cfg.angles_pi[a], failed[a]);
      continue;
    }
    for (int k = 0; k < ng; ++k) {
      ds[k] = at(a, 0, k) - at(0, 0, k);
      db[k] = at(a, 1, k) - at(0, 1, k);
    }
    const double fs = integrate(grid, ds), fb = integrate(grid, db);
    out.theta_pi.push_back(cfg.angles_pi[a]);
    out.F_self.push_back(fs);
    out.F_both.push_back(fb);
    out.U.push_back(fb - fs);
  }
  for (std::size_t i = 0; i + 1 < out.U.size(); ++i) {
    const double dtheta = (out.theta_pi[i + 1] - out.theta_pi[i]) * std::numbers::pi;
    out.torque_theta_pi.push_back(0.5 * (out.theta_pi[i] + out.theta_pi[i + 1]));
    out.torque.push_back(-(out.U[i + 1] - out.U[i]) / dtheta);
  }
  return out;
}

}  // namespace latcas::experiments
