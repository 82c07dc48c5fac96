#include "walker/forcing.hpp"

#include <cmath>

#include "walker/error.hpp"

namespace walker {

bool ForcingProfile::is_zero() const {
  for (const auto& v : phi)
    if (v != cplx{}) return false;
  return Q.K() == 0 || Q.max_abs() == 0.0;
}

ForcingProfile no_forcing(const Grid& g) {
  ForcingProfile f;
  f.phi.assign(static_cast<std::size_t>(g.K() + 1), cplx{});
  f.Q = SpectralState(g);
  return f;
}

ForcingProfile cosine_profile(const Grid& g, double amp, int k) {
  if (k < 1 || k > g.K()) throw ParameterError("cosine_profile: wavenumber outside the grid");
  ForcingProfile f = no_forcing(g);
  f.phi[static_cast<std::size_t>(k)] = 0.5 * amp;
  return f;
}

void add_heat_source(ForcingProfile& f, int k, int j, double amp) {
  if (k < 0 || k > f.Q.K() || j < 1 || j > f.Q.Nz()) throw ParameterError("add_heat_source: mode outside the grid");
  f.Q.theta(k, j) += (k == 0 ? 1.0 : 0.5) * amp;
}

void validate(const ForcingProfile& f, const Grid& g) {
  if (f.phi.size() != static_cast<std::size_t>(g.K() + 1) || f.Q.K() != g.K() || f.Q.Nz() != g.Nz()) {
    throw ParameterError("forcing: profile does not match the grid");
  }
  if (f.phi[0] != cplx{}) throw ParameterError("forcing: bottom temperature deviation must have zero zonal mean");
}

GradFields lift_fields(const ForcingProfile& f, const Transform& tr) {
  const Grid& g = tr.grid();
  validate(f, g);
  const int Nx = g.Nx(), Mz = g.Mz();
  GradFields out;
  out.T.assign(tr.points(), 0.0);
  out.Tx = out.T;
  out.Tz = out.T;
  auto z = tr.z_nodes();
  for (int n = 0; n < Nx; ++n) {
    const double x = n * g.Lx() / Nx;
    double ph = 0.0, phx = 0.0;
    for (int k = 1; k <= g.K(); ++k) {
      const cplx e = std::polar(1.0, g.alpha(k) * x);
      const cplx c = f.phi[static_cast<std::size_t>(k)];
      ph += 2.0 * (c * e).real();
      phx += 2.0 * (cplx(0.0, g.alpha(k)) * c * e).real();
    }
    for (int m = 0; m < Mz; ++m) {
      const auto i = static_cast<std::size_t>(n * Mz + m);
      out.T[i] = ph * (1.0 - z[static_cast<std::size_t>(m)]);
      out.Tx[i] = phx * (1.0 - z[static_cast<std::size_t>(m)]);
      out.Tz[i] = -ph;
    }
  }
  return out;
}

double lift_value(const ForcingProfile& f, const Grid& g, double x1, double z) {
  double ph = 0.0;
  for (int k = 1; k < static_cast<int>(f.phi.size()); ++k) {
    ph += 2.0 * (f.phi[static_cast<std::size_t>(k)] * std::polar(1.0, g.alpha(k) * x1)).real();
  }
  return ph * (1.0 - z);
}

}  // namespace walker
