#include "walker/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "walker/continuation.hpp"
#include "walker/dynamics.hpp"
#include "walker/error.hpp"
#include "walker/linstab.hpp"
#include "walker/topology.hpp"
#include "walker/transition.hpp"

namespace walker::runner {

using config::ExperimentConfig;
using io::json;

namespace {

struct Context {
  const ExperimentConfig& cfg;
  Grid g;
  std::uint64_t seed;
  int threads;
  std::vector<std::string>& warnings;
  std::vector<Artifact>& artifacts;
};

double positive(const ExperimentConfig& c, const std::string& key, double def) {
  const double v = c.get_double(key, def);
  if (!(v > 0.0)) throw ConfigError("[run] " + key + " must be positive");
  return v;
}

int positive_int(const ExperimentConfig& c, const std::string& key, int def) {
  const int v = c.get_int(key, def);
  if (v < 1) throw ConfigError("[run] " + key + " must be at least 1");
  return v;
}

// R from R_over_Rc, else from the parameter section, else def * Rc.
double resolve_R(const ExperimentConfig& c, const std::string& key, double Rc, double def) {
  if (c.has(key)) return positive(c, key, def) * Rc;
  if (c.params.R > 0.0) return c.params.R;
  return def * Rc;
}

ForcingProfile forcing_of(const Context& ctx) {
  const double amp = ctx.cfg.get_double("phi_amp", 0.0);
  const int k = ctx.cfg.get_int("phi_k", 1);
  if (amp == 0.0) return no_forcing(ctx.g);
  if (k < 1 || k > ctx.g.K()) throw ConfigError("[run] phi_k must lie in 1..K of the grid");
  return cosine_profile(ctx.g, amp, k);
}

double max_u1(const SpectralState& s, const Grid& g) {
  const PhysicalFields pf = Transform(g).fields(s);
  double m = 0.0;
  for (double v : pf.u1) m = std::max(m, std::abs(v));
  return m;
}

std::string sweep_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json run_marginal(Context& ctx) {
  const int kmax = positive_int(ctx.cfg, "kmax", 12);
  const int jmax = positive_int(ctx.cfg, "jmax", 3);
  const NondimParams& p = ctx.cfg.params;
  ctx.artifacts.push_back({"marginal.csv", io::marginal_csv(p, kmax, jmax)});
  json minima = json::array();
  for (int j = 1; j <= jmax; ++j) {
    const auto m = linstab::minimize_marginal(j, p.deltaP0(), p.deltaP1());
    minima.push_back({{"j", j}, {"alpha", m.alpha}, {"R", m.R}});
  }
  return {{"kmax", kmax}, {"jmax", jmax}, {"continuous_minima", std::move(minima)}};
}

json run_critical(Context& ctx) {
  const int kmax = positive_int(ctx.cfg, "kmax", 400);
  const NondimParams& p = ctx.cfg.params;
  const auto closed = linstab::critical_rayleigh(p, kmax);
  const auto num = linstab::numeric_critical_rayleigh(p, ctx.g, std::min(ctx.g.K(), kmax));
  json j = io::to_json(closed);
  j["alpha_c"] = closed.kc / p.r0;
  j["numeric"] = {{"Rc", num.Rc}, {"kc", num.kc}, {"rel_diff", std::abs(num.Rc - closed.Rc) / closed.Rc}};
  ctx.artifacts.push_back({"critical.json", j.dump(2) + "\n"});
  return j;
}

dynamics::RunConfig settle_config(const ExperimentConfig& c, double dt_def, double t_end_def) {
  dynamics::RunConfig rc;
  rc.dt = positive(c, "dt", dt_def);
  rc.t_end = positive(c, "t_end", t_end_def);
  rc.diag_every = 100;
  return rc;
}

json run_simulate(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  dynamics::RunConfig rc = settle_config(c, 1e-3, 100.0);
  rc.diag_every = positive_int(c, "diag_every", 100);
  rc.snapshot_interval = c.get_double("snapshot_interval", 0.0);
  rc.convergence_tol = positive(c, "convergence_tol", rc.convergence_tol);
  rc.stop_when_steady = c.get_bool("stop_when_steady", true);
  const std::string ic = c.get_string("ic", "random");
  if (ic != "random" && ic != "file" && ic != "e0") throw ConfigError("[run] ic must be random, file or e0");
  if (ic == "file" && !c.has("ic_file")) throw ConfigError("[run] ic = file needs ic_file");
  const double ic_amp = c.get_double("ic_amp", 1e-3);
  const double mean_flow = c.get_double("mean_flow", 0.0);
  const int snap_nz = positive_int(c, "snapshot_nz", 24);
  const ForcingProfile f = forcing_of(ctx);

  const auto pair = linstab::critical_pair(c.params, ctx.g, ctx.g.K());
  const double R = resolve_R(c, "R_over_Rc", pair.crit.Rc, 1.02);
  const int ic_kmax = c.get_int("ic_kmax", std::min(pair.crit.kc + 2, ctx.g.K()));
  const NondimParams p = c.params.with_R(R);

  SpectralState s0;
  if (ic == "random") {
    s0 = dynamics::random_ic(ctx.g, ctx.seed, ic_amp, ic_kmax);
  } else if (ic == "file") {
    std::ifstream in(c.get_string("ic_file", ""));
    if (!in) throw ConfigError("cannot read ic_file '" + c.get_string("ic_file", "") + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("ic_file: ") + e.what());
    }
    s0 = io::coefficients_from_json(j, ctx.g);
  } else {
    const auto tn = transition::transition_number(c.params, ctx.g);
    s0 = transition::predict_branch(c.params, ctx.g, R, 0.0, tn).state;
  }
  s0.mean(0) += mean_flow;
  s0.time = 0.0;

  const dynamics::Model m(p, ctx.g, f);
  const auto tr = dynamics::integrate(s0, m, rc, &pair);
  for (const auto& w : tr.warnings) ctx.warnings.push_back(w);
  ctx.artifacts.push_back({"diagnostics.csv", dynamics::diagnostics_csv(tr)});
  ctx.artifacts.push_back({"final_state.json", io::coefficients_json(tr.final_state, ctx.g).dump(2) + "\n"});
  ctx.artifacts.push_back({"final_snapshot.csv", io::snapshot_csv(tr.final_state, ctx.g, &f, 0, snap_nz)});
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshots/snapshot_%04zu.csv", i);
    ctx.artifacts.push_back({name, io::snapshot_csv(tr.snapshots[i].state, ctx.g, &f, 0, snap_nz)});
  }
  const auto amp = dynamics::amplitude_of(tr.final_state, pair, ctx.g);
  json j{{"R", R},
         {"R_over_Rc", R / pair.crit.Rc},
         {"Rc", pair.crit.Rc},
         {"verdict", dynamics::to_string(tr.verdict)},
         {"t_final", tr.final_state.time},
         {"steps", tr.steps},
         {"dt_used", tr.dt_used},
         {"final_norm", norm(tr.final_state, ctx.g, m.weight())},
         {"final_tendency", tr.final_tendency},
         {"amplitude", amp.r},
         {"phase", amp.theta},
         {"mean_flow", vertical_integral_u1(tr.final_state)}};
  if (!m.forced()) j["pattern"] = topology::to_string(topology::classify_pattern(tr.final_state, ctx.g).kind);
  return j;
}

json run_transition(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  transition::TransitionOptions to;
  to.phase = c.get_double("phase", 0.0);
  const auto tn = transition::transition_number(c.params, ctx.g, to);
  const double R = resolve_R(c, "R_over_Rc", tn.pair.crit.Rc, 1.02);
  const auto rm = transition::reduced_model(c.params, ctx.g);
  const auto rep = transition::classify(rm);
  json j{{"transition_number", io::to_json(tn)}, {"report", io::to_json(rep)}, {"beta1_slope", rm.slope}};
  if (R > tn.pair.crit.Rc) {
    const auto pb = transition::predict_branch(c.params, ctx.g, R, 0.0, tn);
    j["prediction"] = {{"R", pb.R},
                       {"beta1", pb.beta1},
                       {"amplitude", pb.r},
                       {"e0_amplitude", pb.e0_amplitude},
                       {"alpha_wav", pb.alpha_wav}};
    ctx.artifacts.push_back({"predicted_state.json", io::coefficients_json(pb.state, ctx.g).dump(2) + "\n"});
  }
  ctx.artifacts.push_back({"transition.json", j.dump(2) + "\n"});
  return j;
}

json run_continue(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const std::string problem = c.get_string("problem", "idealized");
  if (problem != "idealized" && problem != "perturbed") throw ConfigError("[run] problem must be idealized or perturbed");
  const bool ideal = problem == "idealized";
  const double f0 = positive(c, "R_start_over_Rc", ideal ? 1.02 : 0.5);
  const double f1 = positive(c, "R_end_over_Rc", 1.1);
  if (f0 == f1) throw ConfigError("[run] R_start_over_Rc and R_end_over_Rc coincide");
  continuation::ContinuationOptions opt;
  opt.ds = positive(c, "ds", 1.0);
  opt.ds_max = positive(c, "ds_max", 5.0);
  opt.max_steps = positive_int(c, "max_steps", 2000);
  opt.index_tol = 1e-7;
  const bool hopf = c.get_bool("hopf", !ideal);
  const int hopf_samples = positive_int(c, "hopf_samples", 12);
  ForcingProfile f = ideal ? no_forcing(ctx.g) : forcing_of(ctx);
  if (!ideal && f.is_zero()) f = cosine_profile(ctx.g, 0.1, 1);
  if (ideal && c.has("phi_amp") && c.get_double("phi_amp", 0.0) != 0.0)
    throw ConfigError("[run] phi_amp needs problem = perturbed");

  const NondimParams& p = c.params;
  continuation::ChannelProblem prob(p, ctx.g, f);
  Eigen::VectorXd x0;
  double Rc = 0.0;
  json extra = json::object();
  if (ideal) {
    const auto tn = transition::transition_number(p, ctx.g);
    Rc = tn.pair.crit.Rc;
    if (f0 <= 1.0) throw ConfigError("[run] R_start_over_Rc must exceed 1 on the idealized branch");
    const auto pb = transition::predict_branch(p, ctx.g, f0 * Rc, 0.0, tn);
    prob.set_phase_reference(pb.state);
    x0 = continuation::newton(prob, prob.vec(pb.state), f0 * Rc).x;
  } else {
    Rc = linstab::numeric_critical_rayleigh(p, ctx.g, ctx.g.K()).Rc;
    const auto bs = continuation::basic_state(p.with_R(f0 * Rc), ctx.g, f);
    for (const auto& w : bs.warnings) ctx.warnings.push_back(w);
    x0 = prob.vec(bs.state);
    const auto pc = continuation::perturbed_critical(p, ctx.g, f, bs, std::min(f0, f1) * Rc, std::max(f0, f1) * Rc);
    extra["perturbed_critical"] = {{"R", pc.R}, {"gap", (pc.R - Rc) / Rc}, {"splitting", pc.splitting}};
  }
  const auto br = continuation::continue_branch(prob, x0, f0 * Rc, f1 * Rc, opt);
  std::optional<continuation::HopfPoint> hp;
  if (hopf) hp = continuation::detect_hopf(prob, x0, std::min(f0, f1) * Rc, std::max(f0, f1) * Rc, hopf_samples);
  ctx.artifacts.push_back({"branch.csv", io::branch_csv(br)});
  json ev = io::branch_events_json(br, hp);
  ctx.artifacts.push_back({"events.json", ev.dump(2) + "\n"});
  json j{{"problem", problem}, {"Rc", Rc}, {"events", ev}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

json run_topology(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const bool svg = c.get_bool("svg", true);
  const double frac = c.get_double("mean_flow_fraction", 0.0);
  const double t_tr = c.get_double("transient_t", 2.0);
  if (t_tr < 0.0) throw ConfigError("[run] transient_t must be non-negative");
  dynamics::RunConfig rc = settle_config(c, 5e-3, 500.0);
  const double ic_amp = c.get_double("ic_amp", 0.1);

  SpectralState s;
  json j;
  const auto pair = linstab::critical_pair(c.params, ctx.g, ctx.g.K());
  const double R = resolve_R(c, "R_over_Rc", pair.crit.Rc, 1.02);
  const dynamics::Model m(c.params.with_R(R), ctx.g);
  if (c.has("state")) {
    std::ifstream in(c.get_string("state", ""));
    if (!in) throw ConfigError("cannot read state '" + c.get_string("state", "") + "'");
    try {
      s = io::coefficients_from_json(json::parse(in), ctx.g);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("state: ") + e.what());
    }
  } else {
    const int ic_kmax = c.get_int("ic_kmax", std::min(3, ctx.g.K()));
    const auto tr = dynamics::integrate(dynamics::random_ic(ctx.g, ctx.seed, ic_amp, ic_kmax), m, rc, &pair);
    s = tr.final_state;
    j["attractor"] = {{"R", R}, {"verdict", dynamics::to_string(tr.verdict)}, {"t_final", tr.final_state.time}};
  }
  if (frac != 0.0) {
    const double cm = frac * max_u1(s, ctx.g);
    s.mean(0) += cm;
    s.time = 0.0;
    j["added_mean_flow"] = cm;
    if (t_tr > 0.0) {
      dynamics::RunConfig r2 = rc;
      r2.t_end = t_tr;
      r2.stop_when_steady = false;
      s = dynamics::integrate(s, m, r2, &pair).final_state;
    }
  }
  const auto rep = topology::classify_pattern(s, ctx.g);
  j["pattern"] = io::to_json(rep);
  j["time"] = s.time;
  ctx.artifacts.push_back({"pattern.json", j["pattern"].dump(2) + "\n"});
  ctx.artifacts.push_back({"state.json", io::coefficients_json(s, ctx.g).dump(2) + "\n"});
  if (svg) ctx.artifacts.push_back({"pattern.svg", topology::render_svg(s, ctx.g, rep)});
  return j;
}

json run_sweep(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const std::vector<double> factors = c.get_list("R_over_Rc", {1.01, 1.02, 1.04});
  for (double f : factors)
    if (!(f > 1.0)) throw ConfigError("[run] sweep values of R_over_Rc must exceed 1");
  const dynamics::RunConfig rc = settle_config(c, 5e-3, 3000.0);
  const double ic_amp = c.get_double("ic_amp", 0.1);
  const int ic_kmax = c.get_int("ic_kmax", 3);

  const auto tn = transition::transition_number(c.params, ctx.g);
  const double Rc = tn.pair.crit.Rc;
  struct Row {
    double R = 0, amp = 0, pred = 0;
    std::string verdict;
  };
  std::vector<Row> rows(factors.size());
  std::vector<std::string> errors(factors.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < factors.size(); i = next++) {
      try {
        const double R = factors[i] * Rc;
        const dynamics::Model m(c.params.with_R(R), ctx.g);
        const auto tr = dynamics::integrate(dynamics::random_ic(ctx.g, ctx.seed, ic_amp, ic_kmax), m, rc, &tn.pair);
        rows[i] = {R, dynamics::amplitude_of(tr.final_state, tn.pair, ctx.g).r,
                   transition::predict_branch(c.params, ctx.g, R, 0.0, tn).r, dynamics::to_string(tr.verdict)};
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nt = std::clamp(ctx.threads, 1, static_cast<int>(factors.size()));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw NumericError("sweep R/Rc=" + sweep_number(factors[i]) + ": " + errors[i]);

  std::ostringstream csv;
  csv << "R_over_Rc,R,amplitude,predicted,verdict\n";
  std::vector<double> Rs, amps;
  json pts = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << sweep_number(factors[i]) << ',' << sweep_number(rows[i].R) << ',' << sweep_number(rows[i].amp) << ','
        << sweep_number(rows[i].pred) << ',' << rows[i].verdict << '\n';
    Rs.push_back(rows[i].R);
    amps.push_back(rows[i].amp);
    pts.push_back({{"R_over_Rc", factors[i]}, {"R", rows[i].R}, {"amplitude", rows[i].amp}, {"predicted", rows[i].pred},
                   {"verdict", rows[i].verdict}});
    if (rows[i].verdict != "steady") ctx.warnings.push_back("sweep point " + sweep_number(factors[i]) + " not steady");
  }
  json j{{"Rc", Rc}, {"points", std::move(pts)}};
  if (rows.size() >= 2) {
    const auto fit = continuation::periodic_amplitude_fit(Rs, amps, Rc);
    j["fit"] = {{"exponent", fit.p}, {"prefactor", fit.c}, {"r2", fit.r2}};
    csv << "# exponent " << sweep_number(fit.p) << '\n';
  }
  ctx.artifacts.push_back({"sweep.csv", csv.str()});
  return j;
}

}  // namespace

io::json config_echo(const ExperimentConfig& cfg) {
  json run = json::object();
  for (const auto& [k, v] : cfg.run) run[k] = v;
  json j{{"kind", cfg.kind},
         {"parameters", io::to_json(cfg.params)},
         {"source", cfg.nondim_section ? "nondim" : (cfg.physical ? "physical" : "default")},
         {"grid", {{"Nx", cfg.Nx}, {"Nz", cfg.Nz}}},
         {"run", std::move(run)}};
  return j;
}

RunReport run(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.kind = cfg.kind;
  rep.seed = opt.seed;
  rep.config = config_echo(cfg);
  rep.warnings = cfg.warnings;
  Grid g = config::make_grid(cfg);
  rep.config["grid"] = {{"r0", g.r0()}, {"Nx", g.Nx()}, {"Nz", g.Nz()}, {"K", g.K()}};
  Context ctx{cfg, g, opt.seed, opt.threads, rep.warnings, rep.artifacts};
  try {
    if (cfg.kind == "marginal") rep.result = run_marginal(ctx);
    else if (cfg.kind == "critical") rep.result = run_critical(ctx);
    else if (cfg.kind == "simulate") rep.result = run_simulate(ctx);
    else if (cfg.kind == "transition") rep.result = run_transition(ctx);
    else if (cfg.kind == "continue") rep.result = run_continue(ctx);
    else if (cfg.kind == "topology") rep.result = run_topology(ctx);
    else if (cfg.kind == "sweep") rep.result = run_sweep(ctx);
    else throw ConfigError("unknown run kind '" + cfg.kind + "'");
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

io::json report_json(const RunReport& rep) {
  json files = json::array();
  for (const auto& a : rep.artifacts) files.push_back(a.name);
  return {{"kind", rep.kind},   {"seed", rep.seed},         {"version", kVersion}, {"config", rep.config},
          {"result", rep.result}, {"warnings", rep.warnings}, {"artifacts", std::move(files)}};
}

void write(const RunReport& rep, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  for (const auto& a : rep.artifacts) io::write_text(out / a.name, a.content);
  io::write_json(out / "report.json", report_json(rep));
  io::write_json(out / "timing.json", {{"wall_time_s", rep.wall_time}});
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WALKER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 1024) return static_cast<int>(v);
    throw ConfigError(std::string("WALKER_THREADS='") + env + "' is not a positive integer");
  }
  return 1;
}

}  // namespace walker::runner
