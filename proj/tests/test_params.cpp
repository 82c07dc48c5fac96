#include <doctest.h>

#include <cmath>

#include "walker/error.hpp"
#include "walker/params.hpp"

using namespace walker;

namespace {

PhysicalParams earthlike() {
  PhysicalParams p;
  p.nu = 1.5e-3;
  p.kappa = 1.5e-3;
  p.alphaT = 3.4e-3;
  p.g = 9.81;
  p.rho0 = 1.2;
  p.Omega = 7.29e-5;
  p.a = 6.37e6;
  p.h = 8.0e3;
  p.C0 = 1e-18;
  p.C1 = 2e-18;
  p.T0 = 300.0;
  p.T1 = 220.0;
  return p;
}

}  // namespace

TEST_CASE("nondimensionalize: definitions") {
  PhysicalParams p = earthlike();
  NondimParams nd = nondimensionalize(p);
  CHECK(nd.Pr == doctest::Approx(1.0));
  CHECK(nd.r0 == doctest::Approx(p.a / p.h));
  CHECK(nd.omega == doctest::Approx(2 * p.Omega * p.h * p.h / p.kappa));

  p.Omega = 0.0;
  p.C0 = p.nu / std::pow(p.h, 4);
  nd = nondimensionalize(p);
  CHECK(nd.omega == 0.0);
  CHECK(nd.delta0 == doctest::Approx(1.0));

  p.alphaT = p.kappa * p.nu / (p.g * (p.T0 - p.T1) * std::pow(p.h, 3));
  CHECK(nondimensionalize(p).R == doctest::Approx(1.0));
}

TEST_CASE("nondimensionalize: homogeneity in (nu, kappa)") {
  PhysicalParams p = earthlike();
  p.kappa = 2.0 * p.nu;
  const NondimParams a = nondimensionalize(p);
  p.nu *= 3.0;
  p.kappa *= 3.0;
  const NondimParams b = nondimensionalize(p);
  CHECK(b.Pr == doctest::Approx(a.Pr));
  CHECK(b.R == doctest::Approx(a.R / 9.0));
}

TEST_CASE("nondimensionalize: rejects invalid physical records") {
  PhysicalParams p = earthlike();
  p.nu = 0.0;
  CHECK_THROWS_AS(nondimensionalize(p), ParameterError);
  p = earthlike();
  p.h = -1.0;
  CHECK_THROWS_AS(nondimensionalize(p), ParameterError);
  p = earthlike();
  p.T1 = 400.0;
  CHECK_THROWS_AS(nondimensionalize(p), ParameterError);
  p = earthlike();
  p.C1 = -1.0;
  CHECK_THROWS_AS(nondimensionalize(p), ParameterError);
}

TEST_CASE("validate nondim") {
  NondimParams nd{1000.0, 1.0, 0.0, 0.0, 0.0, 1.0};
  CHECK_NOTHROW(validate(nd));
  nd.Pr = 0.0;
  CHECK_THROWS_AS(validate(nd), ParameterError);
  nd.Pr = 1.0;
  nd.r0 = -1.0;
  CHECK_THROWS_AS(validate(nd), ParameterError);
  nd.r0 = 1.0;
  nd.delta1 = -0.1;
  CHECK_THROWS_AS(validate(nd), ParameterError);
}

TEST_CASE("deltaP offsets") {
  for (double r0 : {0.5, 1.0, 2.0, 17.0}) {
    NondimParams nd;
    nd.r0 = r0;
    nd.delta0 = 1.25;
    nd.delta1 = 10.0;
    CHECK(nd.deltaP0() - nd.delta0 == doctest::Approx(2.0 / (r0 * r0)).epsilon(1e-14));
    CHECK(nd.deltaP1() - nd.delta1 == doctest::Approx(2.0 / (r0 * r0)).epsilon(1e-14));
  }
}
