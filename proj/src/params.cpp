#include "walker/params.hpp"

#include <cmath>
#include <sstream>

#include "walker/error.hpp"

namespace walker {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string("parameter '") + name + "' must be positive and finite");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string("parameter '") + name + "' must be non-negative and finite");
  }
}

}  // namespace

void validate(const PhysicalParams& phys) {
  require_positive(phys.nu, "nu");
  require_positive(phys.kappa, "kappa");
  require_positive(phys.g, "g");
  require_positive(phys.rho0, "rho0");
  require_positive(phys.a, "a");
  require_positive(phys.h, "h");
  require_nonnegative(phys.C0, "C0");
  require_nonnegative(phys.C1, "C1");
  if (!(phys.T0 > phys.T1)) {
    throw ParameterError("T0 must exceed T1 (layer heated from below)");
  }
}

NondimParams nondimensionalize(const PhysicalParams& phys) {
  validate(phys);
  const double h2 = phys.h * phys.h;
  NondimParams nd;
  nd.R = phys.alphaT * phys.g * (phys.T0 - phys.T1) * h2 * phys.h / (phys.kappa * phys.nu);
  nd.Pr = phys.nu / phys.kappa;
  nd.delta0 = phys.C0 * h2 * h2 / phys.nu;
  nd.delta1 = phys.C1 * h2 * h2 / phys.nu;
  nd.omega = 2.0 * phys.Omega * h2 / phys.kappa;
  nd.r0 = phys.a / phys.h;
  return validate(nd);
}

NondimParams validate(const NondimParams& nd) {
  require_nonnegative(nd.R, "R");
  require_positive(nd.Pr, "Pr");
  require_positive(nd.r0, "r0");
  require_nonnegative(nd.delta0, "delta0");
  require_nonnegative(nd.delta1, "delta1");
  if (!std::isfinite(nd.omega)) {
    throw ParameterError("parameter 'omega' must be finite");
  }
  return nd;
}

std::string describe(const NondimParams& nd) {
  std::ostringstream os;
  os.precision(10);
  os << "R=" << nd.R << " Pr=" << nd.Pr << " delta0=" << nd.delta0 << " delta1=" << nd.delta1
     << " omega=" << nd.omega << " r0=" << nd.r0;
  return os.str();
}

}  // namespace walker
