#include <doctest.h>

#include <cmath>
#include <random>

#include "walker/error.hpp"
#include "walker/field.hpp"

using namespace walker;

TEST_CASE("grid validation") {
  CHECK_THROWS(Grid(1.0, 5, 4));
  CHECK_THROWS(Grid(1.0, 2, 4));
  CHECK_THROWS(Grid(1.0, 8, 1));
  Grid g(1.0, 24, 8);
  CHECK(g.K() == 7);
}

TEST_CASE("zero state maps to zero fields and back") {
  Grid g(1.0, 16, 6);
  SpectralState s(g);
  PhysicalFields f = to_physical(s, g);
  for (double v : f.u1) CHECK(v == 0.0);
  for (double v : f.T) CHECK(v == 0.0);
  SpectralState b = to_spectral(f, g);
  CHECK(b.max_abs() == 0.0);
}

TEST_CASE("single stream-function mode") {
  const double r0 = 1.5;
  const int k = 2;
  Grid g(r0, 16, 6);
  SpectralState s(g);
  s.psi(k, 1) = 0.5;  // 2 Re(0.5 e^{i a x}) = cos(a x)
  PhysicalFields f = to_physical(s, g);
  Transform tr(g);
  auto z = tr.z_nodes();
  double err = 0.0;
  const double a = k / r0;
  for (int n = 0; n < g.Nx(); ++n) {
    const double x = n * g.Lx() / g.Nx();
    for (int m = 0; m < g.Mz(); ++m) {
      const std::size_t i = static_cast<std::size_t>(n * g.Mz() + m);
      err = std::max(err, std::abs(f.u1[i] - kPi * std::cos(a * x) * std::cos(kPi * z[m])));
      err = std::max(err, std::abs(f.u2[i] - a * std::sin(a * x) * std::sin(kPi * z[m])));
    }
  }
  CHECK(err < 1e-13);
  SpectralState back = to_spectral(f, g);
  CHECK(std::abs(back.psi(k, 1) - cplx(0.5, 0.0)) < 1e-13);
  back.psi(k, 1) = 0.0;
  CHECK(back.max_abs() < 1e-13);
}

TEST_CASE("roundtrip of random states") {
  Grid g(0.8, 24, 10);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    SpectralState s = random_state(g, rng, 1.0, g.K());
    SpectralState b = to_spectral(to_physical(s, g), g);
    CHECK((b - s).max_abs() < 1e-12);
  }
}

TEST_CASE("non-divergence-free input is rejected") {
  Grid g(1.0, 16, 6);
  PhysicalFields f = to_physical(SpectralState(g), g);
  Transform tr(g);
  auto z = tr.z_nodes();
  for (int n = 0; n < g.Nx(); ++n) {
    const double x = n * g.Lx() / g.Nx();
    for (int m = 0; m < g.Mz(); ++m) {
      // u1 = sin x grows along x: du1/dx1 != 0 with u2 = 0
      f.u1[static_cast<std::size_t>(n * g.Mz() + m)] = std::sin(x) * (1.0 + 0.0 * z[m]);
    }
  }
  CHECK_THROWS_AS(to_spectral(f, g), RepresentationError);
}

TEST_CASE("vertical integral of u1") {
  Grid g(1.0, 16, 6);
  SpectralState s(g);
  s.psi(2, 1) = 0.3;
  s.psi(1, 3) = cplx(0.1, -0.2);
  CHECK(vertical_integral_u1(s) == 0.0);
  s.mean(0) = 0.7;
  CHECK(vertical_integral_u1(s) == doctest::Approx(0.7));
  s.mean(1) = 0.4;  // integral of cos(pi z) vanishes
  CHECK(vertical_integral_u1(s) == doctest::Approx(0.7));

  // column integrals of sampled u1 are x1-independent for random states
  std::mt19937_64 rng(3);
  SpectralState r = random_state(g, rng, 1.0, g.K());
  PhysicalFields f = to_physical(r, g);
  Transform tr(g);
  auto w = tr.z_weights();
  for (int n = 0; n < g.Nx(); ++n) {
    double col = 0.0;
    for (int m = 0; m < g.Mz(); ++m) col += w[m] * f.u1[static_cast<std::size_t>(n * g.Mz() + m)];
    CHECK(col == doctest::Approx(r.mean(0)).epsilon(1e-12));
  }
}

TEST_CASE("divergence of reconstructed velocity vanishes") {
  Grid g(1.3, 24, 8);
  std::mt19937_64 rng(11);
  Transform tr(g);
  for (int t = 0; t < 3; ++t) {
    SpectralState s = random_state(g, rng, 1.0, g.K());
    GradFields gf;
    tr.gradients(s, gf);
    double mx = 0.0;
    for (std::size_t i = 0; i < gf.u1x.size(); ++i) mx = std::max(mx, std::abs(gf.u1x[i] + gf.u2z[i]));
    CHECK(mx < 1e-12);
  }
}

TEST_CASE("inner product: positivity, orthogonality, Parseval") {
  Grid g(1.0, 24, 8);
  const double w = 3.7;
  std::mt19937_64 rng(5);
  SpectralState a = random_state(g, rng, 1.0, g.K());
  SpectralState b = random_state(g, rng, 1.0, g.K());
  CHECK(inner(a, a, g, w) > 0.0);
  CHECK(inner(SpectralState(g), SpectralState(g), g, w) == 0.0);

  SpectralState m1(g), m2(g);
  m1.psi(1, 2) = 1.0;
  m2.psi(2, 2) = 1.0;
  CHECK(std::abs(inner(m1, m2, g, w)) < 1e-12);
  m2 = SpectralState(g);
  m2.theta(1, 2) = 1.0;
  CHECK(std::abs(inner(m1, m2, g, w)) < 1e-12);

  PhysicalFields fa = to_physical(a, g), fb = to_physical(b, g);
  Transform tr(g);
  auto wz = tr.z_weights();
  double quad = 0.0;
  const double dx = g.Lx() / g.Nx();
  for (int n = 0; n < g.Nx(); ++n)
    for (int m = 0; m < g.Mz(); ++m) {
      const std::size_t i = static_cast<std::size_t>(n * g.Mz() + m);
      quad += dx * wz[m] * (fa.u1[i] * fb.u1[i] + fa.u2[i] * fb.u2[i] + w * fa.T[i] * fb.T[i]);
    }
  CHECK(std::abs(quad - inner(a, b, g, w)) < 1e-10 * std::abs(quad) + 1e-12);
}

TEST_CASE("shift, pack and reality") {
  Grid g(1.0, 16, 5);
  std::mt19937_64 rng(9);
  SpectralState s = random_state(g, rng, 1.0, g.K());
  const Eigen::VectorXd v = s.pack();
  CHECK(v.size() == static_cast<Eigen::Index>(s.real_size()));
  SpectralState u = SpectralState::from_vector(g.K(), g.Nz(), v);
  CHECK((u - s).max_abs() == 0.0);

  SpectralState t = shift(s, g, 0.37);
  const PointValue p0 = evaluate(s, g, 1.0, 0.3);
  const PointValue p1 = evaluate(t, g, 1.37, 0.3);
  CHECK(p0.psi == doctest::Approx(p1.psi).epsilon(1e-12));
  CHECK(p0.T == doctest::Approx(p1.T).epsilon(1e-12));
  CHECK(norm(s, g, 2.0) == doctest::Approx(norm(t, g, 2.0)).epsilon(1e-12));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre01(8, x, w);
  for (int p = 0; p <= 15; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
    CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
  }
}
