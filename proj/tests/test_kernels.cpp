#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "walker/field.hpp"
#include "walker/kernels.hpp"

using namespace walker;

namespace {

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar is always available") {
  CHECK(kernels::available(kernels::Isa::Scalar));
  kernels::ScopedIsa guard(kernels::Isa::Scalar);
  CHECK(kernels::active_isa() == kernels::Isa::Scalar);
}

TEST_CASE("avx2 kernels match the scalar reference") {
  if (!kernels::available(kernels::Isa::Avx2)) {
    MESSAGE("avx2 variant unavailable on this host; skipping");
    return;
  }
  const kernels::Table& s = kernels::scalar_table();
  const kernels::Table& v = *kernels::avx2_table();
  std::mt19937_64 rng(42);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 13u, 64u, 1001u}) {
    auto a = rand_vec(n, rng), b = rand_vec(n, rng), c = rand_vec(n, rng), d = rand_vec(n, rng);
    auto y1 = rand_vec(n, rng);
    auto y2 = y1;
    s.axpy(n, 0.3, a.data(), y1.data());
    v.axpy(n, 0.3, a.data(), y2.data());
    CHECK(max_diff(y1, y2) < 1e-15);
    s.axpy2(n, 0.3, a.data(), -1.7, b.data(), y1.data());
    v.axpy2(n, 0.3, a.data(), -1.7, b.data(), y2.data());
    CHECK(max_diff(y1, y2) < 1e-14);
    CHECK(std::abs(s.dot(n, a.data(), b.data()) - v.dot(n, a.data(), b.data())) < 1e-12);
    s.advect(n, a.data(), b.data(), c.data(), d.data(), -0.5, y1.data());
    v.advect(n, a.data(), b.data(), c.data(), d.data(), -0.5, y2.data());
    CHECK(max_diff(y1, y2) < 1e-15);
    s.mul_acc(n, a.data(), b.data(), 2.5, y1.data());
    v.mul_acc(n, a.data(), b.data(), 2.5, y2.data());
    CHECK(max_diff(y1, y2) < 1e-14);
  }
}

TEST_CASE("transforms agree across kernel variants") {
  if (!kernels::available(kernels::Isa::Avx2)) return;
  Grid g(1.0, 24, 10);
  std::mt19937_64 rng(1);
  SpectralState st = random_state(g, rng, 1.0, g.K());
  PhysicalFields fs, fv;
  SpectralState bs, bv;
  {
    kernels::ScopedIsa guard(kernels::Isa::Scalar);
    fs = to_physical(st, g);
    bs = to_spectral(fs, g);
  }
  {
    kernels::ScopedIsa guard(kernels::Isa::Avx2);
    fv = to_physical(st, g);
    bv = to_spectral(fv, g);
  }
  CHECK(max_diff(fs.u1, fv.u1) < 1e-13);
  CHECK(max_diff(fs.T, fv.T) < 1e-13);
  CHECK((bs - bv).max_abs() < 1e-13);
}
