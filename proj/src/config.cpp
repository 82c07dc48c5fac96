#include "walker/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "walker/error.hpp"
#include "walker/linstab.hpp"

namespace walker::config {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& v, const std::string& where) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  const auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc{} || r.ptr != e) throw ConfigError(where + ": '" + v + "' is not a number");
  return out;
}

long long to_integer(const std::string& v, const std::string& where) {
  long long out = 0;
  const char* b = v.data();
  const char* e = b + v.size();
  const auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc{} || r.ptr != e) throw ConfigError(where + ": '" + v + "' is not an integer");
  return out;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

const std::map<std::string, std::vector<std::string>>& option_table() {
  static const std::map<std::string, std::vector<std::string>> t{
      {"marginal", {"kmax", "jmax"}},
      {"critical", {"kmax"}},
      {"simulate",
       {"R_over_Rc", "dt", "t_end", "ic", "ic_amp", "ic_kmax", "ic_file", "mean_flow", "diag_every",
        "snapshot_interval", "convergence_tol", "stop_when_steady", "phi_amp", "phi_k", "snapshot_nz"}},
      {"transition", {"R_over_Rc", "phase"}},
      {"continue",
       {"problem", "R_start_over_Rc", "R_end_over_Rc", "ds", "ds_max", "max_steps", "phi_amp", "phi_k", "hopf",
        "hopf_samples"}},
      {"topology",
       {"state", "R_over_Rc", "dt", "t_end", "ic_amp", "ic_kmax", "mean_flow_fraction", "svg", "transient_t"}},
      {"sweep", {"R_over_Rc", "dt", "t_end", "ic_amp", "ic_kmax"}},
  };
  return t;
}

}  // namespace

double ExperimentConfig::get_double(const std::string& key, double def) const {
  const auto it = run.find(key);
  return it == run.end() ? def : to_double(it->second, "[run] " + key);
}

int ExperimentConfig::get_int(const std::string& key, int def) const {
  const auto it = run.find(key);
  if (it == run.end()) return def;
  const long long v = to_integer(it->second, "[run] " + key);
  if (v < -(1LL << 31) || v >= (1LL << 31)) throw ConfigError("[run] " + key + ": out of range");
  return static_cast<int>(v);
}

bool ExperimentConfig::get_bool(const std::string& key, bool def) const {
  const auto it = run.find(key);
  if (it == run.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("[run] " + key + ": '" + v + "' is not a boolean");
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& def) const {
  const auto it = run.find(key);
  return it == run.end() ? def : it->second;
}

std::vector<double> ExperimentConfig::get_list(const std::string& key, const std::vector<double>& def) const {
  const auto it = run.find(key);
  if (it == run.end()) return def;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), "[run] " + key));
  if (out.empty()) throw ConfigError("[run] " + key + ": empty list");
  return out;
}

const std::vector<std::string>& run_options(const std::string& kind) {
  const auto it = option_table().find(kind);
  if (it == option_table().end()) throw ConfigError("unknown run kind '" + kind + "'");
  return it->second;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::map<std::string, std::set<std::string>> sections{
      {"nondim", {"R", "Pr", "delta0", "delta1", "omega", "r0"}},
      {"physical", {"nu", "kappa", "alphaT", "g", "rho0", "Omega", "a", "h", "C0", "C1", "T0", "T1"}},
      {"grid", {"Nx", "Nz"}},
      {"run", {}},
  };
  ExperimentConfig cfg;
  for (const auto& [name, sub] : tree) {
    const auto it = sections.find(name);
    if (it == sections.end()) {
      if (!sub.data().empty()) throw ConfigError("key '" + name + "' outside of any section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [k, v] : sub) {
      if (!v.empty()) throw ConfigError("[" + name + "] " + k + ": nested keys are not allowed");
      if (name != "run" && it->second.count(k) == 0) throw ConfigError("unknown key '" + k + "' in [" + name + "]");
    }
  }

  auto num = [&](const std::string& sec, const std::string& key, double def) {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(sec + "." + key, '.'));
    return v ? to_double(trim(*v), "[" + sec + "] " + key) : def;
  };

  const bool has_phys = tree.count("physical") != 0;
  cfg.nondim_section = tree.count("nondim") != 0;
  if (has_phys) {
    PhysicalParams ph;
    ph.nu = num("physical", "nu", 0.0);
    ph.kappa = num("physical", "kappa", 0.0);
    ph.alphaT = num("physical", "alphaT", 0.0);
    ph.g = num("physical", "g", 0.0);
    ph.rho0 = num("physical", "rho0", 0.0);
    ph.Omega = num("physical", "Omega", 0.0);
    ph.a = num("physical", "a", 0.0);
    ph.h = num("physical", "h", 0.0);
    ph.C0 = num("physical", "C0", 0.0);
    ph.C1 = num("physical", "C1", 0.0);
    ph.T0 = num("physical", "T0", 0.0);
    ph.T1 = num("physical", "T1", 0.0);
    cfg.physical = ph;
  }
  if (cfg.nondim_section) {
    NondimParams p;
    p.R = num("nondim", "R", 0.0);
    p.Pr = num("nondim", "Pr", 1.0);
    p.delta0 = num("nondim", "delta0", 0.0);
    p.delta1 = num("nondim", "delta1", 0.0);
    p.omega = num("nondim", "omega", 0.0);
    p.r0 = num("nondim", "r0", 1.0);
    cfg.params = p;
    if (has_phys) cfg.warnings.emplace_back("both [nondim] and [physical] given; [physical] ignored");
  } else if (has_phys) {
    try {
      cfg.params = nondimensionalize(*cfg.physical);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("[physical] ") + e.what());
    }
  } else {
    cfg.params.r0 = 1.0;
  }
  try {
    validate(cfg.params);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[nondim] ") + e.what());
  }

  cfg.Nx = static_cast<int>(num("grid", "Nx", 0.0));
  cfg.Nz = static_cast<int>(num("grid", "Nz", 12.0));
  if (num("grid", "Nx", 0.0) != cfg.Nx || num("grid", "Nz", 12.0) != cfg.Nz)
    throw ConfigError("[grid] Nx and Nz must be integers");
  if (cfg.Nx != 0 && (cfg.Nx < 4 || cfg.Nx > 4096)) throw ConfigError("[grid] Nx must be 0 (automatic) or lie in 4..4096");
  if (cfg.Nx % 2) throw ConfigError("[grid] Nx must be even");
  if (cfg.Nz < 1 || cfg.Nz > 128) throw ConfigError("[grid] Nz must lie in 1..128");

  if (const auto run = tree.get_child_optional("run")) {
    for (const auto& [k, v] : *run) {
      const std::string val = trim(v.data());
      if (k == "kind") {
        cfg.kind = val;
      } else if (k == "seed") {
        const long long s = to_integer(val, "[run] seed");
        if (s < 0) throw ConfigError("[run] seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (k == "out") {
        cfg.out_dir = val;
      } else {
        cfg.run[k] = val;
      }
    }
  }
  if (!cfg.kind.empty()) (void)run_options(cfg.kind);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void finalize(ExperimentConfig& cfg, const std::string& kind) {
  if (!kind.empty()) {
    if (!cfg.kind.empty() && cfg.kind != kind)
      throw ConfigError("config declares kind '" + cfg.kind + "' but '" + kind + "' was requested");
    cfg.kind = kind;
  }
  if (cfg.kind.empty()) throw ConfigError("no run kind given");
  const auto& allowed = run_options(cfg.kind);
  for (const auto& [k, v] : cfg.run) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError("unknown option '" + k + "' for kind " + cfg.kind);
    (void)v;
  }
}

Grid make_grid(const ExperimentConfig& cfg) {
  int Nx = cfg.Nx;
  if (Nx == 0) {
    const int kc = linstab::critical_rayleigh(cfg.params, 400).kc;
    const int K = std::max(3 * kc + 1, 7);
    Nx = 3 * K + 3;
    if (Nx % 2) ++Nx;
  }
  return Grid(cfg.params.r0, Nx, cfg.Nz);
}

}  // namespace walker::config
