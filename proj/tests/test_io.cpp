#include <doctest.h>

#include <cmath>
#include <sstream>

#include "walker/config.hpp"
#include "walker/error.hpp"
#include "walker/io.hpp"
#include "walker/runner.hpp"

using namespace walker;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> fields(const std::string& l) {
  std::vector<double> v;
  std::istringstream in(l);
  for (std::string c; std::getline(in, c, ',');) v.push_back(std::stod(c));
  return v;
}

}  // namespace

TEST_CASE("snapshot csv") {
  const Grid g(1.0, 12, 4);
  SpectralState s(g);
  s.psi(1, 1) = 0.5;  // psi = cos x sin(pi z)
  s.theta(2, 1) = 0.25;
  const auto ls = lines(io::snapshot_csv(s, g, nullptr, 8, 4));
  REQUIRE(ls.size() == 1 + 8 * 5);
  CHECK(ls[0] == "x1,x2,u1,u2,T,psi");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto v = fields(ls[i]);
    REQUIRE(v.size() == 6);
    const double z = v[1] - 1.0;
    CHECK(v[5] == doctest::Approx(std::cos(v[0]) * std::sin(kPi * z)).epsilon(1e-10));
    CHECK(v[2] == doctest::Approx(kPi * std::cos(v[0]) * std::cos(kPi * z)).epsilon(1e-10));
    CHECK(v[3] == doctest::Approx(std::sin(v[0]) * std::sin(kPi * z)).epsilon(1e-10));
    CHECK(v[4] == doctest::Approx(0.5 * std::cos(2 * v[0]) * std::sin(kPi * z)).scale(1.0));
  }
  // the lift shows in T at the bottom wall
  const ForcingProfile f = cosine_profile(g, 0.3, 1);
  const auto lf = lines(io::snapshot_csv(SpectralState(g), g, &f, 8, 4));
  CHECK(fields(lf[1])[4] == doctest::Approx(0.3));
}

TEST_CASE("coefficient json round trip") {
  const Grid g(1.0, 12, 5);
  std::mt19937_64 rng(2);
  SpectralState s = random_state(g, rng, 0.5, g.K());
  s.time = 3.5;
  const io::json j = io::coefficients_json(s, g);
  CHECK(j["psi"].contains("1,1"));
  CHECK(j["mean"].contains("0,0"));
  const SpectralState r = io::coefficients_from_json(io::json::parse(j.dump()), g);
  CHECK((r - s).max_abs() == 0.0);
  CHECK(r.time == 3.5);

  io::json bad = j;
  bad["psi"]["9,1"] = {1.0, 0.0};
  CHECK_THROWS_AS(io::coefficients_from_json(bad, g), ConfigError);
  bad = j;
  bad["theta"]["x"] = {1.0, 0.0};
  CHECK_THROWS_AS(io::coefficients_from_json(bad, g), ConfigError);
}

TEST_CASE("marginal and branch tables") {
  NondimParams p;
  const auto ls = lines(io::marginal_csv(p, 4, 2));
  REQUIRE(ls.size() == 9);
  CHECK(ls[0] == "k,j,R");
  CHECK(fields(ls[2])[2] == doctest::Approx(linstab::marginal_rayleigh({2, 1}, p)));

  continuation::Branch br;
  continuation::BranchPoint pt;
  pt.lambda = 2.0;
  pt.amplitude = 0.5;
  pt.index = 1;
  pt.leading = {cplx(0.25, -1.0)};
  br.points.push_back(pt);
  const auto bl = lines(io::branch_csv(br));
  CHECK(bl[0] == "s,R,amplitude,index,leading_re,leading_im");
  CHECK(bl[1] == "0,2,0.5,1,0.25,-1");
  const io::json ev = io::branch_events_json(br, std::nullopt);
  CHECK(ev["folds"].empty());
  CHECK(ev["hopf"].is_null());
}

TEST_CASE("config sections") {
  SUBCASE("nondim") {
    const auto c = config::parse_config("[nondim]\nR = 800\nPr = 7\nr0 = 2\n[grid]\nNx = 30\nNz = 8\n");
    CHECK(c.params.R == 800.0);
    CHECK(c.params.Pr == 7.0);
    CHECK(c.params.r0 == 2.0);
    CHECK(c.Nx == 30);
    CHECK(c.Nz == 8);
    CHECK(c.warnings.empty());
  }
  SUBCASE("physical is nondimensionalized") {
    const auto c = config::parse_config(
        "[physical]\nnu=1.5e-3\nkappa=1.5e-3\nalphaT=3.4e-3\ng=9.81\nrho0=1.2\nOmega=7.29e-5\na=6.37e6\nh=8e3\n"
        "C0=1e-18\nC1=2e-18\nT0=300\nT1=220\n");
    CHECK(c.params.Pr == doctest::Approx(1.0));
    CHECK(c.params.r0 == doctest::Approx(6.37e6 / 8e3));
  }
  SUBCASE("nondim wins with a warning") {
    const auto c = config::parse_config("[physical]\nnu = 1\n[nondim]\nr0 = 3\n");
    CHECK(c.params.r0 == 3.0);
    REQUIRE(c.warnings.size() == 1);
  }
  SUBCASE("run options") {
    auto c = config::parse_config("[run]\nkind = sweep\nseed = 7\nR_over_Rc = 1.01, 1.02,1.04\n");
    CHECK(c.seed == 7u);
    CHECK(c.get_list("R_over_Rc", {}) == std::vector<double>{1.01, 1.02, 1.04});
    config::finalize(c, "");
    CHECK(c.kind == "sweep");
    CHECK_THROWS_AS(config::finalize(c, "critical"), ConfigError);
  }
}

TEST_CASE("malformed configs") {
  for (const char* text : {"[nondim\nR=1\n", "R = 1\n[nondim]\n", "[mystery]\nx=1\n", "[nondim]\nRa = 1\n",
                           "[nondim]\nPr = one\n", "[nondim]\nPr = -1\n", "[grid]\nNz = 2.5\n", "[grid]\nNz = 0\n",
                           "[run]\nseed = -3\n", "[grid]\nNx = 25\n", "[run]\nkind = dance\n", "[physical]\nnu = 1\n",
                           "[nondim]\nR = 1\nR = 2\n"}) {
    CAPTURE(text);
    CHECK_THROWS_AS(config::parse_config(text), ConfigError);
  }
  auto c = config::parse_config("[run]\nfoo = 1\n");
  CHECK_THROWS_AS(config::finalize(c, "critical"), ConfigError);
  c = config::parse_config("[run]\ndt = fast\n");
  config::finalize(c, "simulate");
  CHECK_THROWS_AS((void)c.get_double("dt", 1.0), ConfigError);
  auto e = config::parse_config("");
  CHECK_THROWS_AS(config::finalize(e, ""), ConfigError);
}

TEST_CASE("automatic grid holds the harmonics of kc") {
  auto c = config::parse_config("[nondim]\nr0 = 2\n");
  const Grid g = config::make_grid(c);
  const int kc = linstab::critical_rayleigh(c.params, 100).kc;
  CHECK(g.K() >= 3 * kc + 1);
  CHECK(g.Nz() == 12);
}

TEST_CASE("runner: critical report") {
  auto c = config::parse_config("[nondim]\nr0 = 1\n");
  config::finalize(c, "critical");
  const runner::RunReport a = runner::run(c, {});
  CHECK(a.result["kc"] == 2);
  CHECK(a.result["multiplicity"] == 2);
  CHECK(a.result["Rc"].get<double>() == doctest::Approx(linstab::critical_rayleigh(c.params, 40).Rc));
  const runner::RunReport b = runner::run(c, {});
  CHECK(runner::report_json(a).dump() == runner::report_json(b).dump());
  CHECK(runner::report_json(a)["seed"] == 1);
}

TEST_CASE("runner: simulate is deterministic given the seed") {
  auto c = config::parse_config("[grid]\nNx = 18\nNz = 6\n[run]\nR_over_Rc = 1.05\ndt = 5e-3\nt_end = 2\n");
  config::finalize(c, "simulate");
  const auto a = runner::run(c, {1, 5});
  const auto b = runner::run(c, {1, 5});
  const auto d = runner::run(c, {1, 6});
  CHECK(runner::report_json(a).dump() == runner::report_json(b).dump());
  CHECK(runner::report_json(a).dump() != runner::report_json(d).dump());
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) CHECK(a.artifacts[i].content == b.artifacts[i].content);
}

TEST_CASE("runner: option errors surface as config errors") {
  auto c = config::parse_config("[run]\ndt = -1\n");
  config::finalize(c, "simulate");
  CHECK_THROWS_AS(runner::run(c, {}), ConfigError);
  c = config::parse_config("[run]\nR_over_Rc = 0.9\n");
  config::finalize(c, "sweep");
  CHECK_THROWS_AS(runner::run(c, {}), ConfigError);
}
