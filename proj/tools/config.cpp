#include "latcas/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace latcas::cli {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::torque3d: return "torque3d";
    case ExperimentKind::crossover2d: return "crossover2d";
    case ExperimentKind::rough2d: return "rough2d";
    case ExperimentKind::flat2d: return "flat2d";
  }
  return "?";
}

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::torque3d, ExperimentKind::crossover2d, ExperimentKind::rough2d,
                 ExperimentKind::flat2d}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("run.kind", "unknown experiment '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

Index parse_index(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v.find('-') != std::string::npos) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + f(xs[i]);
  return s;
}

struct Field {
  std::string section, key;
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string idx(Index i) { return std::to_string(i); }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"run", "kind", [](RunConfig& c, auto&, auto& v) { c.kind = kind_from_string(v); },
       [](const RunConfig& c) { return to_string(c.kind); }},
      {"run", "formulation", [](RunConfig& c, auto&, auto& v) { c.formulation = v; },
       [](const RunConfig& c) { return c.formulation; }},
      {"run", "c", [](RunConfig& c, auto& k, auto& v) { c.c = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.c); }},
      {"run", "threads", [](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_index(k, v)); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"lattice", "L", [](RunConfig& c, auto& k, auto& v) { c.L = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.L); }},
      {"lattice", "box", [](RunConfig& c, auto& k, auto& v) { c.box = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.box); }},
      {"material", "chi", [](RunConfig& c, auto& k, auto& v) { c.chi = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.chi); }},
      {"material", "omega0",
       [](RunConfig& c, auto& k, auto& v) {
         c.omega0.clear();
         for (const auto& x : split_list(v)) c.omega0.push_back(parse_real(k, x));
       },
       [](const RunConfig& c) { return join(c.omega0, fmt); }},
      {"material", "epsilon", [](RunConfig& c, auto& k, auto& v) { c.epsilon = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.epsilon); }},
      {"material", "eps_a", [](RunConfig& c, auto& k, auto& v) { c.eps_a = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.eps_a); }},
      {"material", "eps_b", [](RunConfig& c, auto& k, auto& v) { c.eps_b = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.eps_b); }},
      {"quadrature", "alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = parse_alpha(k, v); },
       [](const RunConfig& c) { return c.alpha ? fmt(*c.alpha) : std::string("auto"); }},
      {"quadrature", "ng", [](RunConfig& c, auto& k, auto& v) { c.ng = static_cast<int>(parse_index(k, v)); },
       [](const RunConfig& c) { return std::to_string(c.ng); }},
      {"geometry", "offsets",
       [](RunConfig& c, auto& k, auto& v) {
         c.offsets.clear();
         if (v == "auto") return;
         for (const auto& x : split_list(v)) c.offsets.push_back(parse_index(k, x));
       },
       [](const RunConfig& c) { return c.offsets.empty() ? std::string("auto") : join(c.offsets, idx); }},
      {"geometry", "distances",
       [](RunConfig& c, auto& k, auto& v) {
         c.distances.clear();
         if (v == "auto") return;
         for (const auto& x : split_list(v)) c.distances.push_back(parse_index(k, x));
       },
       [](const RunConfig& c) { return c.distances.empty() ? std::string("auto") : join(c.distances, idx); }},
      {"geometry", "angles_pi",
       [](RunConfig& c, auto& k, auto& v) {
         c.angles_pi.clear();
         for (const auto& x : split_list(v)) c.angles_pi.push_back(parse_real(k, x));
       },
       [](const RunConfig& c) { return join(c.angles_pi, fmt); }},
      {"geometry", "diameter", [](RunConfig& c, auto& k, auto& v) { c.diameter = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.diameter); }},
      {"geometry", "thickness", [](RunConfig& c, auto& k, auto& v) { c.thickness = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.thickness); }},
      {"geometry", "gap", [](RunConfig& c, auto& k, auto& v) { c.gap = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.gap); }},
      {"geometry", "fill", [](RunConfig& c, auto& k, auto& v) { c.fill = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.fill); }},
      {"ensemble", "realizations", [](RunConfig& c, auto& k, auto& v) { c.realizations = parse_index(k, v); },
       [](const RunConfig& c) { return idx(c.realizations); }},
      {"ensemble", "seed", [](RunConfig& c, auto& k, auto& v) { c.seed = parse_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"fit", "rmin", [](RunConfig& c, auto& k, auto& v) { c.fit_rmin = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.fit_rmin); }},
      {"fit", "rmax", [](RunConfig& c, auto& k, auto& v) { c.fit_rmax = parse_real(k, v); },
       [](const RunConfig& c) { return fmt(c.fit_rmax); }},
      {"output", "dir", [](RunConfig& c, auto&, auto& v) { c.out = v; },
       [](const RunConfig& c) { return c.out; }},
      {"output", "resume", [](RunConfig& c, auto& k, auto& v) { c.resume = parse_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.resume ? "true" : "false"); }},
  };
  return f;
}

}  // namespace

double parse_real(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

std::optional<double> parse_alpha(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return parse_real(key, v);
}

void RunConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  };
  positive("run.c", c);
  if (formulation != "magnetic" && formulation != "vector_potential") {
    throw ConfigError("run.formulation", "expected magnetic or vector_potential");
  }
  if (threads < 0) throw ConfigError("run.threads", "must be non-negative");
  if (L < 4 || L % 2 != 0) throw ConfigError("lattice.L", "must be even and at least 4");
  if (box < 4) throw ConfigError("lattice.box", "must be at least 4");
  if (!(chi >= 0.0)) throw ConfigError("material.chi", "must be non-negative");
  if (omega0.empty()) throw ConfigError("material.omega0", "list is empty");
  for (const double w : omega0) positive("material.omega0", w);
  positive("material.epsilon", epsilon);
  positive("material.eps_a", eps_a);
  positive("material.eps_b", eps_b);
  if (alpha && !(*alpha > 0.0 && std::isfinite(*alpha))) throw ConfigError("quadrature.alpha", "must be positive");
  if (ng < 2) throw ConfigError("quadrature.ng", "must be at least 2");
  for (const Index d : offsets) {
    if (d < 2) throw ConfigError("geometry.offsets", "offsets must be at least 2");
  }
  for (const Index d : distances) {
    if (d < 2) throw ConfigError("geometry.distances", "distances must be at least 2");
  }
  if (angles_pi.empty() || angles_pi.front() != 0.0) {
    throw ConfigError("geometry.angles_pi", "must start at 0");
  }
  positive("geometry.diameter", diameter);
  if (thickness <= 0) throw ConfigError("geometry.thickness", "must be positive");
  if (gap <= 0) throw ConfigError("geometry.gap", "must be positive");
  if (realizations < 2) throw ConfigError("ensemble.realizations", "must be at least 2");
  if (!(fit_rmin >= 0.0)) throw ConfigError("fit.rmin", "must be non-negative");
  if (out.empty()) throw ConfigError("output.dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> by_name;
  for (const auto& f : fields()) by_name[f.section + "." + f.key] = &f;

  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string name = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError(name, "unknown key");
    if (!seen.insert(name).second) throw ConfigError(name, "given twice");
    it->second->set(cfg, name, value);
  }
  if (!seen.count("run.kind")) throw ConfigError("run.kind", "missing");
  const char* box_key = cfg.kind == ExperimentKind::torque3d ? "lattice.box" : "lattice.L";
  if (!seen.count(box_key)) throw ConfigError(box_key, "missing");
  if (!seen.count("quadrature.ng")) throw ConfigError("quadrature.ng", "missing");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      out += (section.empty() ? "" : "\n") + ("[" + f.section + "]\n");
      section = f.section;
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace latcas::cli
