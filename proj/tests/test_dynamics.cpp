#include <doctest.h>

#include <cmath>
#include <random>

#include "walker/dynamics.hpp"
#include "walker/error.hpp"
#include "walker/kernels.hpp"
#include "walker/linstab.hpp"

using namespace walker;
using namespace walker::dynamics;

namespace {

NondimParams base(double R = 700.0) {
  NondimParams p;
  p.R = R;
  p.Pr = 0.7;
  p.delta0 = 0.5;
  p.delta1 = 1.0;
  p.r0 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("zero state has zero tendency") {
  Grid g(1.0, 16, 6);
  Model m(base(), g);
  CHECK(m.tendency(SpectralState(g)).max_abs() == 0.0);
}

TEST_CASE("nonlinear term is energy neutral") {
  Grid g(1.0, 24, 10);
  NondimParams p = base();
  Model m(p, g);
  std::mt19937_64 rng(21);
  const double w = default_weight(p.Pr, p.R);
  for (int t = 0; t < 10; ++t) {
    SpectralState s = random_state(g, rng, 0.5, g.K());
    const double n = norm(s, g, w);
    CHECK(std::abs(inner(m.bilinear(s, s), s, g, w)) / (n * n * n) < 1e-10);
    // <N(a, b), b> = 0 for distinct a, b
    SpectralState a = random_state(g, rng, 0.5, g.K());
    CHECK(std::abs(inner(m.bilinear(a, s), s, g, w)) / (norm(a, g, w) * n * n) < 1e-10);
  }
}

TEST_CASE("linearization at rest matches the assembled blocks") {
  Grid g(1.2, 16, 8);
  NondimParams p = base();
  p.r0 = 1.2;
  Model m(p, g);
  for (int k = 0; k <= 3; ++k) {
    const linstab::LinearBlock b = linstab::assemble_linear_block(p, p.R, k, g);
    const Eigen::MatrixXcd op = b.op();
    const int nv = (k == 0) ? g.Nz() + 1 : g.Nz();
    for (int c = 0; c < op.cols(); ++c) {
      SpectralState e(g);
      if (k == 0) {
        if (c < nv) e.mean(c) = 1.0; else e.theta(0, c - nv + 1) = 1.0;
      } else {
        if (c < nv) e.psi(k, c + 1) = 1.0; else e.theta(k, c - nv + 1) = 1.0;
      }
      const double h = 1e-3;
      SpectralState jp = m.tendency(h * e);
      jp -= m.tendency(-h * e);
      jp *= 0.5 / h;
      double scale = op.col(c).cwiseAbs().maxCoeff(), err = 0.0;
      for (int r = 0; r < op.rows(); ++r) {
        cplx v;
        if (k == 0) v = r < nv ? cplx(jp.mean(r)) : jp.theta(0, r - nv + 1);
        else v = r < nv ? jp.psi(k, r + 1) : jp.theta(k, r - nv + 1);
        err = std::max(err, std::abs(v - op(r, c)));
      }
      CHECK(err < 1e-12 * scale);
    }
  }
}

TEST_CASE("diffusive and mean-flow modes decay at the exact rates") {
  Grid g(1.0, 16, 6);
  NondimParams p = base(0.0);
  Model m(p, g);
  const double t_end = 0.2;
  auto run = [&](SpectralState s, double dt) {
    Stepper st(m, dt);
    const int n = static_cast<int>(std::lround(t_end / dt));
    for (int i = 0; i < n; ++i) st.step(s);
    return s;
  };
  SpectralState s(g), sm(g);
  sm.mean(0) = 0.8;
  s.psi(2, 1) = cplx(1e-7, 2e-7);
  const double a2 = 4.0, jp2 = kPi * kPi, q = a2 + jp2;
  const double rate_psi = p.Pr * (q + (p.deltaP0() * jp2 + p.deltaP1() * a2) / q);
  const double rate_mean = p.Pr * p.deltaP0();
  double prev_err = 0.0;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const SpectralState r = run(s, dt);
    const double em = std::abs(run(sm, dt).mean(0) - 0.8 * std::exp(-rate_mean * t_end));
    const double ep = std::abs(r.psi(2, 1) - s.psi(2, 1) * std::exp(-rate_psi * t_end)) / std::abs(s.psi(2, 1));
    CHECK(em < 1e-5);
    CHECK(ep < 1e-2);
    if (prev_err > 0.0) CHECK(prev_err / ep == doctest::Approx(4.0).epsilon(0.1));
    prev_err = ep;
  }
}

TEST_CASE("self-convergence of the nonlinear scheme is second order") {
  Grid g(1.0, 16, 8);
  NondimParams p = base(900.0);
  Model m(p, g);
  SpectralState s0 = random_ic(g, 5, 0.05, 3);
  auto run = [&](double dt) {
    Stepper st(m, dt);
    SpectralState s = s0;
    const int n = static_cast<int>(std::lround(0.1 / dt));
    for (int i = 0; i < n; ++i) st.step(s);
    return s;
  };
  const SpectralState ref = run(2.5e-4);
  const double w = m.weight();
  const double e1 = norm(run(4e-3) - ref, g, w);
  const double e2 = norm(run(2e-3) - ref, g, w);
  const double e3 = norm(run(1e-3) - ref, g, w);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("translation equivariance") {
  Grid g(1.0, 16, 8);
  Model m(base(900.0), g);
  SpectralState s0 = random_ic(g, 8, 0.05, 3);
  RunConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.5;
  cfg.stop_when_steady = false;
  const double dx = 0.731;
  const Trajectory a = integrate(s0, m, cfg);
  const Trajectory b = integrate(shift(s0, g, dx), m, cfg);
  CHECK((shift(a.final_state, g, dx) - b.final_state).max_abs() < 1e-8);
}

TEST_CASE("amplitude of the critical pair") {
  Grid g(1.0, 16, 8);
  NondimParams p = base();
  const linstab::CriticalPair cp = linstab::critical_pair(p, g, g.K());
  Amplitude a = amplitude_of(cp.psi1.state, cp, g);
  CHECK(a.r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(a.theta) < 1e-12);
  const double th = 0.7;
  SpectralState s = std::cos(th) * cp.psi1.state;
  s.axpy(std::sin(th), cp.psi1_tilde.state);
  a = amplitude_of(s, cp, g);
  CHECK(a.r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.theta == doctest::Approx(th).epsilon(1e-12));
  // a phase is a translation
  const SpectralState t = shift(cp.psi1.state, g, th / g.alpha(cp.crit.kc));
  CHECK((t - s).max_abs() < 1e-13);
}

TEST_CASE("tendency agrees across kernel variants") {
  if (!kernels::available(kernels::Isa::Avx2)) return;
  Grid g(1.0, 24, 10);
  Model m(base(), g);
  SpectralState s = random_ic(g, 3, 0.3, g.K());
  SpectralState a, b;
  {
    kernels::ScopedIsa guard(kernels::Isa::Scalar);
    a = m.tendency(s);
  }
  {
    kernels::ScopedIsa guard(kernels::Isa::Avx2);
    b = m.tendency(s);
  }
  CHECK((a - b).max_abs() < 1e-11 * a.max_abs());
}

TEST_CASE("blow-up is reported") {
  Grid g(1.0, 16, 6);
  Model m(base(900.0), g);
  SpectralState s = random_ic(g, 1, 50.0, g.K());
  RunConfig cfg;
  cfg.dt = 0.5;
  cfg.t_end = 100.0;
  cfg.cfl_max = 1e9;
  CHECK_THROWS_AS(integrate(s, m, cfg), NumericError);
}
