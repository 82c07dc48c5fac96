#include <doctest.h>

#include <cmath>

#include "walker/error.hpp"
#include "walker/linstab.hpp"

using namespace walker;
using namespace walker::linstab;

namespace {

NondimParams idealized(double r0, double delta = 0.0, double Pr = 1.0) {
  NondimParams p;
  p.r0 = r0;
  p.delta0 = p.delta1 = delta;
  p.Pr = Pr;
  return p;
}

}  // namespace

TEST_CASE("marginal curve closed-form values") {
  const double pi4 = std::pow(kPi, 4);
  CHECK(marginal_rayleigh(kPi / std::sqrt(2.0), 1, 0.0, 0.0) == doctest::Approx(27.0 * pi4 / 4.0).epsilon(1e-14));
  CHECK(27.0 * pi4 / 4.0 == doctest::Approx(657.5114).epsilon(1e-7));
  CHECK(marginal_rayleigh(kPi, 1, 0.0, 0.0) == doctest::Approx(8.0 * pi4).epsilon(1e-14));
  CHECK(marginal_rayleigh(kPi, 1, 3.0, 3.0) == doctest::Approx(8.0 * pi4 + 12.0 * kPi * kPi).epsilon(1e-14));
  CHECK(8.0 * pi4 + 12.0 * kPi * kPi == doctest::Approx(897.708).epsilon(1e-6));
  CHECK_THROWS_AS(marginal_rayleigh(ModeIndex{0, 1}, idealized(1.0)), ParameterError);
}

TEST_CASE("continuous minimum of the classical curve") {
  const ContinuousMinimum m = minimize_marginal(1, 0.0, 0.0);
  CHECK(std::abs(m.alpha - kPi / std::sqrt(2.0)) < 1e-8);
  CHECK(std::abs(m.R - 27.0 * std::pow(kPi, 4) / 4.0) < 1e-8);

  // unique interior minimum: the scan has a single descent/ascent switch
  const ContinuousMinimum f = minimize_marginal(1, 2.0, 3.0);
  int switches = 0;
  double prev = marginal_rayleigh(0.05, 1, 2.0, 3.0);
  int dir = -1;
  for (double a = 0.1; a < 20.0; a += 0.05) {
    const double v = marginal_rayleigh(a, 1, 2.0, 3.0);
    const int d = v < prev ? -1 : 1;
    if (d != dir) ++switches;
    dir = d;
    prev = v;
  }
  CHECK(switches == 1);
  CHECK(f.R <= marginal_rayleigh(f.alpha * 1.01, 1, 2.0, 3.0));
  CHECK(f.R <= marginal_rayleigh(f.alpha * 0.99, 1, 2.0, 3.0));
}

TEST_CASE("critical Rayleigh number over integer k") {
  const CriticalPoint0 big = critical_rayleigh(idealized(100.0), 600);
  CHECK(std::abs(big.Rc - 657.5114) / 657.5114 < 1e-3);
  CHECK(std::abs(big.kc / 100.0 - kPi / std::sqrt(2.0)) < 0.01);
  CHECK(big.multiplicity == 2);

  const CriticalPoint0 c = critical_rayleigh(idealized(1.0), 10);
  CHECK(c.kc == 2);
  CHECK(c.multiplicity == 2);
  CHECK(!c.degenerate);
  CHECK_THROWS_AS(critical_rayleigh(idealized(100.0), 50), NumericError);

  // r0 where k = 1 and k = 2 tie: root of R(1) - R(2) in r0
  auto gap = [](double r0) {
    const NondimParams p = idealized(r0);
    return marginal_rayleigh(ModeIndex{1, 1}, p) - marginal_rayleigh(ModeIndex{2, 1}, p);
  };
  double lo = 0.3, hi = 1.0;
  REQUIRE(gap(lo) * gap(hi) < 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) * gap(lo) > 0.0 ? lo : hi) = mid;
  }
  const CriticalPoint0 t = critical_rayleigh(idealized(0.5 * (lo + hi)), 10);
  CHECK(t.degenerate);
  CHECK(t.multiplicity == 4);
  CHECK(std::min(t.kc, t.k_tie) == 1);
  CHECK(t.kc == 1);
}

TEST_CASE("mean-flow block is diagonal") {
  const NondimParams p = idealized(1.0, 0.5, 0.7);
  Grid g(1.0, 12, 6);
  const LinearBlock b = assemble_linear_block(p, 500.0, 0, g);
  const Eigen::MatrixXcd op = b.op();
  for (int r = 0; r < op.rows(); ++r)
    for (int c = 0; c < op.cols(); ++c) {
      if (r == c) continue;
      CHECK(std::abs(op(r, c)) < 1e-12);
    }
  for (int j = 0; j <= g.Nz(); ++j) {
    const double expect = -p.Pr * ((j * kPi) * (j * kPi) + p.deltaP0());
    CHECK(std::abs(op(j, j) - expect) < 1e-10 * std::abs(expect));
  }
}

TEST_CASE("blocks are self-adjoint in the weighted product and omega-free") {
  NondimParams p = idealized(1.3, 1.0, 7.0);
  Grid g(1.3, 16, 8);
  for (int k = 0; k <= 3; ++k) {
    const LinearBlock b = assemble_linear_block(p, 900.0, k, g);
    const Eigen::MatrixXcd S = b.W * b.op();
    CHECK((S - S.adjoint()).norm() < 1e-9 * S.norm());
    p.omega = 10.0;
    const LinearBlock bw = assemble_linear_block(p, 900.0, k, g);
    p.omega = 0.0;
    CHECK((bw.K - b.K).norm() < 1e-10 * b.K.norm());
    const Eigen::VectorXcd ev = block_eigenvalues(p, 900.0, k, g);
    for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i].imag()) < 1e-10 * std::max(1.0, std::abs(ev[i])));
  }
}

TEST_CASE("discretized criticality matches the closed form") {
  for (double r0 : {0.5, 1.0, 2.0}) {
    for (double d : {0.0, 1.0, 10.0}) {
      const NondimParams p = idealized(r0, d);
      Grid g(r0, 3 * 8 + 2, 32);  // K = 8
      const CriticalPoint0 cl = critical_rayleigh(p, 8);
      const CriticalPoint0 nu = numeric_critical_rayleigh(p, g, 8);
      CHECK(nu.kc == cl.kc);
      CHECK(std::abs(nu.Rc - cl.Rc) / cl.Rc < 1e-6);
    }
  }
}

TEST_CASE("spectrum at and below criticality") {
  const NondimParams p = idealized(1.0);
  Grid g(1.0, 16, 12);
  const CriticalPoint0 c = critical_rayleigh(p, g.K());
  const auto at = eigen_spectrum(p, c.Rc, 6, g);
  CHECK(std::abs(at[0].beta) < 1e-8);
  CHECK(std::abs(at[1].beta) < 1e-8);
  CHECK(at[2].beta.real() < -0.1);
  CHECK(at[0].k == c.kc);
  CHECK(norm(at[0].state, g, p.Pr * c.Rc) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner(at[0].state, at[1].state, g, p.Pr * c.Rc)) < 1e-12);
  // single vertical mode, temperature coefficient real positive
  CHECK(at[0].state.theta(c.kc, 1).real() > 0.0);
  CHECK(std::abs(at[0].state.theta(c.kc, 1).imag()) < 1e-14);
  for (int j = 2; j <= g.Nz(); ++j) {
    CHECK(std::abs(at[0].state.psi(c.kc, j)) < 1e-6);
    CHECK(std::abs(at[0].state.theta(c.kc, j)) < 1e-6);
  }
  const auto below = eigen_spectrum(p, 0.5 * c.Rc, 6, g);
  for (const auto& e : below) CHECK(e.beta.real() < 0.0);
}

TEST_CASE("pes report") {
  const NondimParams p = idealized(1.0, 1.0);
  Grid g(1.0, 16, 12);
  const double Rc = critical_rayleigh(p, g.K()).Rc;
  const PesReport r = verify_pes(p, 0.8 * Rc, 1.2 * Rc, g);
  CHECK(r.rel_error < 1e-6);
  CHECK(r.crossing_count == 2);
  CHECK(r.next_eigenvalue < -0.1);
  CHECK(r.slope > 0.0);
  CHECK(r.ok);
  CHECK_THROWS_AS(verify_pes(p, 1.1 * Rc, 1.2 * Rc, g), NumericError);
}
