#include "walker/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "walker/error.hpp"

namespace walker::io {

namespace {

std::string key(int k, int j) { return std::to_string(k) + "," + std::to_string(j); }

void put(std::ostringstream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v + 0.0);
  os << buf;
}

std::pair<int, int> parse_key(const std::string& s) {
  const auto c = s.find(',');
  if (c == std::string::npos) throw ConfigError("coefficient key '" + s + "' is not of the form k,j");
  try {
    return {std::stoi(s.substr(0, c)), std::stoi(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw ConfigError("coefficient key '" + s + "' is not of the form k,j");
  }
}

}  // namespace

std::string snapshot_csv(const SpectralState& s, const Grid& g, const ForcingProfile* f, int nx, int nz) {
  if (nx <= 0) nx = 2 * g.Nx();
  if (nz <= 0) throw ParameterError("snapshot_csv: nz must be positive");
  std::ostringstream os;
  os << "x1,x2,u1,u2,T,psi\n";
  for (int m = 0; m <= nz; ++m) {
    const double z = static_cast<double>(m) / nz;
    for (int i = 0; i < nx; ++i) {
      const double x = g.Lx() * i / nx;
      const PointValue pv = evaluate(s, g, x, z);
      double T = pv.T;
      if (f != nullptr && !f->phi.empty()) T += lift_value(*f, g, x, z);
      for (double v : {x, g.r0() + z, pv.u1(), pv.u2(), T}) {
        put(os, v);
        os << ',';
      }
      put(os, pv.psi);
      os << '\n';
    }
  }
  return os.str();
}

json coefficients_json(const SpectralState& s, const Grid& g) {
  json j;
  j["grid"] = {{"r0", g.r0()}, {"Nx", g.Nx()}, {"Nz", g.Nz()}};
  j["time"] = s.time;
  json psi = json::object(), theta = json::object(), mean = json::object();
  for (int jj = 0; jj <= s.Nz(); ++jj) mean[key(0, jj)] = s.mean(jj);
  for (int k = 0; k <= s.K(); ++k)
    for (int jj = 1; jj <= s.Nz(); ++jj) {
      if (k >= 1) psi[key(k, jj)] = {s.psi(k, jj).real(), s.psi(k, jj).imag()};
      theta[key(k, jj)] = {s.theta(k, jj).real(), s.theta(k, jj).imag()};
    }
  j["psi"] = std::move(psi);
  j["theta"] = std::move(theta);
  j["mean"] = std::move(mean);
  return j;
}

SpectralState coefficients_from_json(const json& j, const Grid& g) {
  SpectralState s(g);
  try {
    if (j.contains("time")) s.time = j.at("time").get<double>();
    auto complex_block = [&](const char* name, bool is_psi) {
      if (!j.contains(name)) return;
      for (const auto& [k_str, v] : j.at(name).items()) {
        const auto [k, jj] = parse_key(k_str);
        if (k < (is_psi ? 1 : 0) || k > g.K() || jj < 1 || jj > g.Nz())
          throw ConfigError(std::string(name) + " coefficient " + k_str + " lies outside the grid");
        const cplx c(v.at(0).get<double>(), v.at(1).get<double>());
        (is_psi ? s.psi(k, jj) : s.theta(k, jj)) = c;
      }
    };
    complex_block("psi", true);
    complex_block("theta", false);
    if (j.contains("mean"))
      for (const auto& [k_str, v] : j.at("mean").items()) {
        const auto [k, jj] = parse_key(k_str);
        if (k != 0 || jj < 0 || jj > g.Nz()) throw ConfigError("mean coefficient " + k_str + " lies outside the grid");
        s.mean(jj) = v.get<double>();
      }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed coefficient file: ") + e.what());
  }
  s.enforce_reality();
  return s;
}

std::string marginal_csv(const NondimParams& p, int kmax, int jmax) {
  if (kmax < 1 || jmax < 1) throw ParameterError("marginal_csv: kmax and jmax must be at least 1");
  std::ostringstream os;
  os << "k,j,R\n";
  for (int j = 1; j <= jmax; ++j)
    for (int k = 1; k <= kmax; ++k) {
      os << k << ',' << j << ',';
      put(os, linstab::marginal_rayleigh(linstab::ModeIndex{k, j}, p));
      os << '\n';
    }
  return os.str();
}

std::string branch_csv(const continuation::Branch& br) {
  std::ostringstream os;
  os << "s,R,amplitude,index,leading_re,leading_im\n";
  for (const auto& pt : br.points) {
    const cplx lead = pt.leading.empty() ? cplx{} : pt.leading.front();
    put(os, pt.s);
    os << ',';
    put(os, pt.lambda);
    os << ',';
    put(os, pt.amplitude);
    os << ',' << pt.index << ',';
    put(os, lead.real());
    os << ',';
    put(os, lead.imag());
    os << '\n';
  }
  return os.str();
}

json branch_events_json(const continuation::Branch& br, const std::optional<continuation::HopfPoint>& hopf) {
  json j;
  json folds = json::array();
  for (const auto& f : br.folds)
    folds.push_back({{"R", f.lambda},
                     {"min_real_eig", f.min_real_eig},
                     {"index_before", f.index_before},
                     {"index_after", f.index_after}});
  j["folds"] = std::move(folds);
  if (hopf)
    j["hopf"] = {{"R", hopf->lambda}, {"frequency", hopf->frequency}};
  else
    j["hopf"] = nullptr;
  j["points"] = br.points.size();
  j["notes"] = br.notes;
  return j;
}

json to_json(const NondimParams& p) {
  return {{"R", p.R}, {"Pr", p.Pr}, {"delta0", p.delta0}, {"delta1", p.delta1}, {"omega", p.omega}, {"r0", p.r0}};
}

json to_json(const linstab::CriticalPoint0& c) {
  json j{{"Rc", c.Rc}, {"kc", c.kc}, {"multiplicity", c.multiplicity}, {"degenerate", c.degenerate}};
  if (c.degenerate) j["k_tie"] = c.k_tie;
  return j;
}

json to_json(const transition::TransitionReport& r) {
  json br = json::array();
  for (const auto& b : r.branches)
    br.push_back({{"above", b.above},
                  {"count", b.count},
                  {"coefficient", b.coefficient},
                  {"sign", b.sign},
                  {"stability", b.stability}});
  return {{"type", transition::to_string(r.type)},
          {"lambda0", r.lambda0},
          {"alpha_t", r.alpha_t},
          {"k_order", r.k_order},
          {"branches", std::move(br)},
          {"notes", r.notes}};
}

json to_json(const transition::TransitionNumber& t) {
  return {{"alpha_t", t.alpha_t},
          {"alpha_route2", t.alpha_route2},
          {"alpha_route3", t.alpha_route3},
          {"quadratic", t.quadratic},
          {"k_order", t.k_order},
          {"weight", t.weight},
          {"center_manifold_residual", t.cm.residual},
          {"center_manifold_wavenumbers", t.cm.wavenumbers},
          {"critical", to_json(t.pair.crit)}};
}

json to_json(const topology::PatternReport& r) {
  json pts = json::array();
  for (const auto& c : r.points)
    pts.push_back({{"x1", c.x1},
                   {"x2", c.x2},
                   {"kind", topology::to_string(c.kind)},
                   {"wall", c.wall},
                   {"stream", c.stream}});
  json traces = json::array();
  for (const auto& t : r.stability.traces)
    traces.push_back({{"from", t.from}, {"ray", t.ray}, {"end", t.end}, {"to", t.to}, {"distance", t.distance}});
  return {{"kind", topology::to_string(r.kind)},
          {"cell_count", r.cell_count},
          {"mean_flow", r.mean_flow},
          {"in_E", r.in_E},
          {"structurally_stable_in_Htilde", r.structurally_stable_in_Htilde},
          {"census",
           {{"interior_centers", r.interior_centers},
            {"interior_saddles", r.interior_saddles},
            {"wall_saddles_bottom", r.wall_saddles_bottom},
            {"wall_saddles_top", r.wall_saddles_top},
            {"degenerate", r.degenerate}}},
          {"stability",
           {{"regular", r.stability.regular},
            {"wall_to_wall", r.stability.wall_to_wall},
            {"interior_saddles_self_connected", r.stability.interior_saddles_self_connected},
            {"in_Htilde", r.stability.in_Htilde},
            {"stable_in_H", r.stability.stable_in_H},
            {"stable_in_Htilde", r.stability.stable_in_Htilde},
            {"notes", r.stability.notes}}},
          {"points", std::move(pts)},
          {"traces", std::move(traces)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace walker::io
