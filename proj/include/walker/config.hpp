#pragma once

// INI experiment configuration:
//
//   [nondim]    R Pr delta0 delta1 omega r0
//   [physical]  nu kappa alphaT g rho0 Omega a h C0 C1 T0 T1
//   [grid]      Nx Nz            (Nx = 0 sizes the grid from kc)
//   [run]       kind seed out and kind-specific options
//
// [nondim] wins over [physical] when both are present.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "walker/field.hpp"
#include "walker/params.hpp"

namespace walker::config {

inline const std::vector<std::string> kKinds{"marginal", "critical",  "simulate", "transition",
                                             "continue", "topology", "sweep"};

struct ExperimentConfig {
  std::string kind;
  NondimParams params;
  std::optional<PhysicalParams> physical;
  bool nondim_section = false;
  int Nx = 0;
  int Nz = 12;
  std::map<std::string, std::string> run;  ///< kind-specific options, raw
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;

  [[nodiscard]] bool has(const std::string& key) const { return run.count(key) != 0; }
  [[nodiscard]] double get_double(const std::string& key, double def) const;
  [[nodiscard]] int get_int(const std::string& key, int def) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool def) const;
  [[nodiscard]] std::string get_string(const std::string& key, const std::string& def) const;
  /// Comma-separated numbers.
  [[nodiscard]] std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;
};

/// Throws ConfigError on syntax errors, unknown sections or keys, values
/// that do not parse and parameters outside their domain.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets the run kind (a conflicting [run] kind is an error) and checks
/// every [run] option against the options of that kind.
void finalize(ExperimentConfig& cfg, const std::string& kind);

/// Kind-specific option names.
const std::vector<std::string>& run_options(const std::string& kind);

/// Grid of the experiment; Nx = 0 keeps K >= max(3 kc + 1, 7).
Grid make_grid(const ExperimentConfig& cfg);

}  // namespace walker::config
