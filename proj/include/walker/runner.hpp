#pragma once

// Config-driven studies. run() computes everything in memory; write() puts
// the artifacts and the report on disk, so a failed run leaves no outputs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "walker/config.hpp"
#include "walker/io.hpp"

namespace walker::runner {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  int threads = 1;
  std::uint64_t seed = 1;
};

struct Artifact {
  std::string name;  ///< relative path inside the output directory
  std::string content;
};

struct RunReport {
  std::string kind;
  std::uint64_t seed = 1;
  io::json config;
  io::json result;
  std::vector<std::string> warnings;
  std::vector<Artifact> artifacts;
  double wall_time = 0.0;
};

/// `cfg` must be finalized. Throws ConfigError for bad options, NumericError
/// for numeric failures.
RunReport run(const config::ExperimentConfig& cfg, const RunOptions& opt);

/// Config echo: resolved parameters, grid and options.
io::json config_echo(const config::ExperimentConfig& cfg);

/// Everything except the wall time.
io::json report_json(const RunReport& rep);

/// Artifacts, report.json and timing.json.
void write(const RunReport& rep, const std::filesystem::path& out);

/// Threads from an explicit value, else WALKER_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace walker::runner
