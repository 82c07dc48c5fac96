#include <cmath>

#include "doctest.h"
#include "walker/continuation.hpp"
#include "walker/error.hpp"
#include "walker/transition.hpp"

using namespace walker;
using namespace walker::continuation;

namespace {

NondimParams channel() {
  NondimParams p;
  p.r0 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("scalar fold located with index flip") {
  const ScalarFold prob(2.0);
  Eigen::VectorXd x0(1);
  x0 << 3.0;
  ContinuationOptions opt;
  opt.ds = 0.05;
  opt.ds_max = 0.1;
  const Branch br = continue_branch(prob, x0, 3.0, -3.0, opt);
  REQUIRE(br.folds.size() == 1);
  const FoldPoint& f = br.folds.front();
  CHECK(std::abs(f.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(f.lambda + 1.0) < 1e-8);
  CHECK(f.min_real_eig < 1e-6);
  CHECK(f.index_before == 0);
  CHECK(f.index_after == 1);
  for (const auto& pt : br.points) {
    CHECK(std::abs(prob.residual(pt.x, pt.lambda)[0]) < 1e-10);
    if (pt.x[0] > 1.01) CHECK(pt.index == 0);
    if (pt.x[0] < 0.99 && pt.x[0] > 0.01) CHECK(pt.index == 1);
  }
}

TEST_CASE("scalar branch is retraced in reverse") {
  const ScalarFold prob(2.0);
  Eigen::VectorXd x0(1);
  x0 << 3.0;
  ContinuationOptions opt;
  opt.ds = 0.05;
  opt.ds_max = 0.1;
  const Branch fwd = continue_branch(prob, x0, 3.0, -3.0, opt);
  // back along the lower part: start at u = 0.5 and head down through the fold
  Eigen::VectorXd x1(1);
  x1 << 0.5;
  const Branch rev = continue_branch(prob, x1, -0.75, -3.0, opt);
  REQUIRE(!rev.folds.empty());
  CHECK(std::abs(rev.folds.front().lambda - fwd.folds.front().lambda) < 1e-9);
  CHECK(rev.folds.front().index_before == 1);
  CHECK(rev.folds.front().index_after == 0);
  for (const auto& pt : rev.points) CHECK(std::abs(pt.lambda - (pt.x[0] * pt.x[0] - 2.0 * pt.x[0])) < 1e-9);
}

TEST_CASE("continuation rejects bad steps") {
  const ScalarFold prob(2.0);
  Eigen::VectorXd x0(1);
  x0 << 3.0;
  ContinuationOptions opt;
  opt.ds = 0.0;
  CHECK_THROWS_AS(continue_branch(prob, x0, 3.0, -3.0, opt), ParameterError);
  CHECK_THROWS_AS(continue_branch(prob, x0, 3.0, 3.0), ParameterError);
}

TEST_CASE("newton reports residual history on failure") {
  const ScalarFold prob(2.0);
  Eigen::VectorXd x0(1);
  x0 << 0.5;
  // u' = -5u + 2u^2 - u^3 has only u = 0; from u = 0.5 it converges
  CHECK(std::abs(newton(prob, x0, -5.0).x[0]) < 1e-10);
  // no real nonzero root near 1 for lambda = -5 with one iteration
  try {
    (void)newton(prob, x0, -5.0, 1e-10, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.what()).find("residual history") != std::string::npos);
  }
}

TEST_CASE("Hopf normal form") {
  const HopfNormalForm nf(2.0);
  const auto hp = detect_hopf(nf, Eigen::VectorXd::Zero(2), -0.5, 0.7, 13);
  REQUIRE(hp.has_value());
  CHECK(std::abs(hp->lambda) < 1e-8);
  CHECK(std::abs(hp->frequency - 2.0) < 1e-8);

  std::vector<double> mus{0.01, 0.02, 0.04, 0.08}, amps;
  for (double mu : mus) {
    std::vector<double> t;
    const auto x = hopf_trajectory(nf, mu, 800.0, 0.01, &t);
    amps.push_back(oscillation_amplitude(x, 0.05));
    CHECK(std::abs(oscillation_frequency(t, x, 0.2) - (2.0)) < 1e-3);
  }
  const AmplitudeFit fit = periodic_amplitude_fit(mus, amps, 0.0);
  CHECK(std::abs(fit.p - 0.5) < 0.01);
  CHECK(std::abs(fit.c - 1.0) < 0.01);
  CHECK(fit.reportable);
  CHECK(fit.linear_r2 < fit.r2);
}

TEST_CASE("no Hopf without complex pairs") {
  const ScalarFold prob(2.0);
  CHECK_FALSE(detect_hopf(prob, Eigen::VectorXd::Zero(1), -1.0, 1.0, 9).has_value());
}

TEST_CASE("amplitude fit input checks") {
  CHECK_THROWS_AS(periodic_amplitude_fit({1.0}, {1.0}, 0.0), ParameterError);
  CHECK_THROWS_AS(periodic_amplitude_fit({1.0, 2.0}, {0.0, 1.0}, 0.0), NumericError);
  CHECK_THROWS_AS(periodic_amplitude_fit({-1.0, 2.0}, {1.0, 1.0}, 0.0), ParameterError);
}

TEST_CASE("channel jacobian matches finite differences") {
  NondimParams p = channel();
  p.R = 500.0;
  const Grid g(1.0, 12, 5);
  ForcingProfile f = cosine_profile(g, 0.2, 1);
  const ChannelProblem prob(p, g, f);
  std::mt19937_64 rng(4);
  const SpectralState y = random_state(g, rng, 0.3, g.K());
  const Eigen::VectorXd x = prob.vec(y);
  const Eigen::MatrixXd J = prob.jacobian(x, p.R);
  const SpectralState v = random_state(g, rng, 1.0, g.K());
  const Eigen::VectorXd dv = v.pack();
  const double h = 1e-5;
  const Eigen::VectorXd fd = (prob.residual(x + h * dv, p.R) - prob.residual(x - h * dv, p.R)) / (2 * h);
  CHECK((J * dv - fd).norm() < 1e-7 * fd.norm());
  const Eigen::VectorXd dl = prob.dlambda(x, p.R);
  const Eigen::VectorXd fdl = (prob.residual(x, p.R + 1e-3) - prob.residual(x, p.R - 1e-3)) / 2e-3;
  CHECK((dl - fdl).norm() < 1e-7 * std::max(1.0, fdl.norm()));
}

TEST_CASE("basic state") {
  NondimParams p = channel();
  const Grid g(1.0, 24, 8);
  p.R = 400.0;

  SUBCASE("zero forcing gives rest") {
    const BasicState bs = basic_state(p, g, no_forcing(g));
    CHECK(bs.state.max_abs() == 0.0);
    CHECK(bs.epsilon == 0.0);
  }
  SUBCASE("linear response limit") {
    std::vector<double> ratio;
    for (double e : {1e-2, 1e-3, 1e-4}) {
      const BasicState bs = basic_state(p, g, cosine_profile(g, e, 1));
      CHECK(bs.residual < 1e-10);
      CHECK(bs.warnings.empty() == (bs.epsilon <= 0.1));
      ratio.push_back(bs.epsilon / e);
      // plug back
      const dynamics::Model m(p, g, cosine_profile(g, e, 1));
      CHECK(norm(m.tendency(bs.state), g, m.weight()) < 1e-10);
    }
    CHECK(std::abs(ratio[1] - ratio[2]) < 0.1 * std::abs(ratio[0] - ratio[1]) + 1e-12);
    CHECK(std::abs(ratio[2] - ratio[1]) / ratio[2] < 1e-4);
  }
  SUBCASE("large forcing warns") {
    const BasicState bs = basic_state(p, g, cosine_profile(g, 0.1, 1));
    CHECK(bs.epsilon > 0.1);
    CHECK_FALSE(bs.warnings.empty());
  }
}

TEST_CASE("perturbation operator is linear in the basic state") {
  NondimParams p = channel();
  p.R = 600.0;
  const Grid g(1.0, 12, 5);
  const dynamics::Model m(p, g);
  std::mt19937_64 rng(8);
  const SpectralState y = random_state(g, rng, 0.5, g.K());
  const Eigen::MatrixXd L = m.jacobian(SpectralState(g));
  const Eigen::MatrixXd P1 = m.jacobian(y) - L;
  const Eigen::MatrixXd P3 = m.jacobian(3.0 * y) - L;
  CHECK((P3 - 3.0 * P1).norm() < 1e-12 * std::max(1.0, P3.norm()));
}

TEST_CASE("perturbed spectrum") {
  NondimParams p = channel();
  const Grid g(1.0, 24, 8);
  const auto crit = linstab::numeric_critical_rayleigh(p, g, g.K());
  p.R = 0.5 * crit.Rc;

  SUBCASE("small forcing approaches the idealized spectrum") {
    const auto ideal = linstab::eigen_spectrum(p, p.R, 4, g);
    const BasicState bs = basic_state(p, g, cosine_profile(g, 1e-5, 1));
    const Spectrum sp = perturbed_spectrum(p, g, cosine_profile(g, 1e-5, 1), bs, 4);
    REQUIRE(sp.eigenvalues.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(sp.eigenvalues[i] - ideal[i].beta) < 1e-6);
    }
  }
  SUBCASE("forcing splits the double eigenvalue and shifts the crossing") {
    const ForcingProfile f = cosine_profile(g, 0.1, 1);
    const BasicState bs = basic_state(p, g, f);
    p.R = crit.Rc;
    const PerturbedCritical pc = perturbed_critical(p, g, f, bs, 0.9 * crit.Rc, 1.1 * crit.Rc, 5);
    CHECK(std::abs(pc.R - crit.Rc) < 0.05 * crit.Rc);
    CHECK(std::abs(pc.leading[0]) < 1e-8);
    CHECK(pc.splitting > 1e-8);
  }
}

TEST_CASE("idealized branch is the pitchfork circle") {
  const NondimParams p = channel();
  const Grid g(1.0, 24, 8);
  const auto tn = transition::transition_number(p, g);
  const double Rc = tn.pair.crit.Rc;
  const auto pb = transition::predict_branch(p, g, 1.02 * Rc, 0.0, tn);
  ChannelProblem prob(p, g, no_forcing(g));
  prob.set_phase_reference(pb.state);
  const NewtonReport nr = newton(prob, prob.vec(pb.state), 1.02 * Rc);
  CHECK(std::abs(nr.x[nr.x.size() - 1]) < 1e-10);
  ContinuationOptions opt;
  opt.ds = 1.0;
  opt.ds_max = 5.0;
  opt.index_tol = 1e-7;
  const Branch br = continue_branch(prob, nr.x, 1.02 * Rc, 1.1 * Rc, opt);
  CHECK(br.folds.empty());
  const double c0 = br.points.front().amplitude * br.points.front().amplitude / (1.02 * Rc - Rc);
  for (const auto& pt : br.points) {
    CHECK(pt.index == 0);
    CHECK(pt.dlambda_ds > 0.0);
    CHECK(std::abs(pt.amplitude * pt.amplitude / (pt.lambda - Rc) - c0) < 0.02 * c0);
  }
}
