#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "walker/config.hpp"
#include "walker/error.hpp"
#include "walker/io.hpp"
#include "walker/runner.hpp"
#include "walker/verify.hpp"

namespace fs = std::filesystem;
using namespace walker;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_config) {
  if (with_config) sub->add_option("--config", c.config, "INI experiment config");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads (default WALKER_THREADS or 1)")->check(CLI::PositiveNumber);
}

void write_diagnostics(const fs::path& out, const std::string& kind, std::uint64_t seed, const std::string& what,
                       const io::json& config) {
  try {
    io::write_json(out / "diagnostics.json",
                   {{"kind", kind}, {"seed", seed}, {"error", what}, {"config", config}});
    std::cerr << "diagnostics written to " << (out / "diagnostics.json").string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "could not write diagnostics: " << e.what() << "\n";
  }
}

int run_kind(const std::string& kind, const Common& c) {
  config::ExperimentConfig cfg;
  int threads = 1;
  try {
    cfg = c.config.empty() ? config::parse_config("") : config::load_config(c.config);
    config::finalize(cfg, kind);
    threads = runner::resolve_threads(c.threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  const std::uint64_t seed = c.seed ? *c.seed : cfg.seed.value_or(1);
  const fs::path out = !c.out.empty() ? fs::path(c.out) : (!cfg.out_dir.empty() ? fs::path(cfg.out_dir) : "walker_out");
  try {
    const runner::RunReport rep = runner::run(cfg, {threads, seed});
    runner::write(rep, out);
    std::cout << rep.result.dump(2) << "\n";
    std::cout << "wrote " << rep.artifacts.size() + 2 << " files to " << out.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RepresentationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    write_diagnostics(out, kind, seed, e.what(), runner::config_echo(cfg));
    return 3;
  }
}

int run_verify(const std::string& suite, const Common& c) {
  int threads = 1;
  try {
    if (!verify::is_suite(suite)) throw ConfigError("unknown verify suite '" + suite + "'");
    threads = runner::resolve_threads(c.threads);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const auto results = verify::run_suite(suite, threads, c.seed.value_or(1));
  bool all = true;
  for (const auto& r : results) {
    std::cout << verify::line(r) << "\n";
    all = all && r.pass;
  }
  if (!c.out.empty()) {
    io::write_json(fs::path(c.out) / "verify.json", verify::to_json(results));
    io::write_json(fs::path(c.out) / "verify_timing.json", verify::timing_json(results));
  }
  std::cout << (all ? "all passed" : "failures") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equatorial Boussinesq channel toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", runner::kVersion);

  Common common;
  std::string chosen;
  for (const auto& kind : config::kKinds) {
    CLI::App* sub = app.add_subcommand(kind, "run a " + kind + " study");
    add_common(sub, common, true);
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  std::string suite;
  CLI::App* ver = app.add_subcommand("verify", "run an acceptance suite");
  ver->add_option("suite", suite, "linstab, transition, dynamics, topology, continuation, determinism or all")
      ->required();
  add_common(ver, common, false);
  ver->callback([&chosen] { chosen = "verify"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (chosen == "verify") return run_verify(suite, common);
    return run_kind(chosen, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
