#include <doctest.h>

#include <cmath>

#include "walker/error.hpp"
#include "walker/transition.hpp"

using namespace walker;
using namespace walker::transition;

namespace {

NondimParams idealized(double r0, double delta, double Pr) {
  NondimParams p;
  p.r0 = r0;
  p.delta0 = p.delta1 = delta;
  p.Pr = Pr;
  return p;
}

Grid grid_for(double r0, int Nz = 10) {
  const int kmax = linstab::critical_rayleigh(idealized(r0, 0.0, 1.0), 40).kc;
  int K = std::max(2 * kmax + 1, 5);
  int Nx = 3 * K + 1;
  if (Nx % 2) ++Nx;
  return Grid(r0, Nx, Nz);
}

}  // namespace

TEST_CASE("center manifold function: wavenumbers, orthogonality, residual") {
  const NondimParams p = idealized(1.0, 0.0, 1.0);
  Grid g = grid_for(1.0);
  const TransitionNumber tn = transition_number(p, g);
  const int kc = tn.pair.crit.kc;
  REQUIRE(tn.cm.wavenumbers.size() == 2);
  CHECK(tn.cm.wavenumbers[0] == 0);
  CHECK(tn.cm.wavenumbers[1] == 2 * kc);
  CHECK(std::abs(tn.cm.orth_psi1) < 1e-10);
  CHECK(std::abs(tn.cm.orth_psi1t) < 1e-10);
  CHECK(tn.cm.residual < 1e-10);
  CHECK(tn.k_order == 3);
  CHECK(tn.alpha_t < 0.0);
  CHECK(std::abs(tn.alpha_t - tn.alpha_route2) < 1e-8 * std::abs(tn.alpha_t));
  CHECK(std::abs(tn.alpha_t - tn.alpha_route3) < 1e-8 * std::abs(tn.alpha_t));
}

TEST_CASE("transition number: phase invariance and homogeneity") {
  const NondimParams p = idealized(2.0, 1.0, 0.7);
  Grid g = grid_for(2.0, 8);
  const TransitionNumber a = transition_number(p, g);
  TransitionOptions o;
  o.phase = 1.1;
  const TransitionNumber b = transition_number(p, g, o);
  CHECK(std::abs(a.alpha_t - b.alpha_t) < 1e-10 * std::abs(a.alpha_t));
  o.phase = 0.0;
  o.scale = 3.0;
  const TransitionNumber c = transition_number(p, g, o);
  CHECK(c.alpha_t == doctest::Approx(9.0 * a.alpha_t).epsilon(1e-10));
  // predicted physical branch unchanged: |beta/alpha|^{1/2} |e1| scales as c / c
  CHECK(std::sqrt(1.0 / std::abs(c.alpha_t)) * 3.0 == doctest::Approx(std::sqrt(1.0 / std::abs(a.alpha_t))));
}

TEST_CASE("ill-posed grids are rejected") {
  const NondimParams p = idealized(1.0, 0.0, 1.0);
  Grid g(1.0, 10, 6);  // K = 3 < 2 kc
  CHECK_THROWS_AS(transition_number(p, g), RepresentationError);
}

TEST_CASE("classification of normal forms") {
  const TransitionReport r1 = classify(normal_form(3, -1.0, 1.0));
  CHECK(r1.type == TransitionType::I);
  REQUIRE(r1.branches.size() == 1);
  CHECK(r1.branches[0].above);
  CHECK(r1.branches[0].stability == "attractor");
  const TransitionReport r2 = classify(normal_form(3, 1.0, 1.0));
  CHECK(r2.type == TransitionType::II);
  CHECK(!r2.branches[0].above);
  CHECK(r2.branches[0].stability == "saddle");
  const TransitionReport r3 = classify(normal_form(2, 1.0, 1.0));
  CHECK(r3.type == TransitionType::III);
  REQUIRE(r3.branches.size() == 2);
  CHECK(r3.branches[0].above);
  CHECK(r3.branches[0].stability == "attractor");
  CHECK(r3.branches[1].stability == "saddle");
  CHECK_THROWS_AS(classify(normal_form(3, 0.0, 1.0)), NumericError);

  const ReducedModel rm = normal_form(3, -1.0, 1.0);
  const auto pts = branch_points(r1, rm, 0.25);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1] == doctest::Approx(0.5));
  CHECK(branch_points(r1, rm, -0.25).empty());
}

TEST_CASE("oracle: exact roots and escapes") {
  const OracleResult o1 = normal_form_oracle(3, -1.0, 1.0, {0.1, -0.1});
  CHECK(o1.consistent);
  CHECK(o1.observed == TransitionType::I);
  REQUIRE(o1.per_lambda[0].attractors.size() == 2);
  CHECK(std::abs(o1.per_lambda[0].attractors[1] - std::sqrt(0.1)) < 1e-6);
  const OracleResult o2 = normal_form_oracle(3, 1.0, 1.0, {0.1, -0.1});
  CHECK(o2.observed == TransitionType::II);
  CHECK(o2.per_lambda[0].escaped > 0);
  const OracleResult o3 = normal_form_oracle(2, 1.0, 1.0, {0.1, -0.1});
  CHECK(o3.observed == TransitionType::III);
}

TEST_CASE("predicted branch at zero phase is e0") {
  const NondimParams p = idealized(1.0, 0.0, 1.0);
  Grid g = grid_for(1.0, 8);
  const TransitionNumber tn = transition_number(p, g);
  const double R = 1.02 * tn.pair.crit.Rc;
  for (double th : {0.0, 0.4}) {
    const PredictedBranch b = predict_branch(p, g, R, th, tn);
    CHECK(b.r > 0.0);
    double err = 0.0;
    for (double x : {0.1, 1.3, 2.9, 4.4})
      for (double z : {0.1, 0.5, 0.77}) {
        const PointValue v = evaluate(b.state, g, x, z);
        const auto [u1, u2] = e0_velocity(b, x, z);
        err = std::max({err, std::abs(v.u1() - u1), std::abs(v.u2() - u2)});
      }
    CHECK(err < 1e-8 * b.e0_amplitude);
  }
  CHECK_THROWS_AS(predict_branch(p, g, 0.99 * tn.pair.crit.Rc, 0.0, tn), ParameterError);
}
