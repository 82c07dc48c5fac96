#pragma once

#include <string>

namespace walker {

/// Dimensional inputs of the equatorial channel model, SI units.
struct PhysicalParams {
  double nu = 0.0;      ///< kinematic viscosity [m^2/s]
  double kappa = 0.0;   ///< thermal diffusivity [m^2/s]
  double alphaT = 0.0;  ///< thermal expansion coefficient [1/K]
  double g = 0.0;       ///< gravity [m/s^2]
  double rho0 = 0.0;    ///< reference density [kg/m^3]
  double Omega = 0.0;   ///< rotation rate [1/s]
  double a = 0.0;       ///< planetary radius [m]
  double h = 0.0;       ///< layer height [m]
  double C0 = 0.0;      ///< zonal turbulent friction coefficient [1/(m^2 s)]
  double C1 = 0.0;      ///< vertical turbulent friction coefficient [1/(m^2 s)]
  double T0 = 0.0;      ///< bottom-average temperature [K]
  double T1 = 0.0;      ///< tropopause temperature [K]
};

/// Dimensionless control parameters. Every solver in the library consumes
/// only this type.
struct NondimParams {
  double R = 0.0;       ///< Rayleigh number
  double Pr = 1.0;      ///< Prandtl number
  double delta0 = 0.0;  ///< zonal friction number
  double delta1 = 0.0;  ///< vertical friction number
  double omega = 0.0;   ///< rotation number
  double r0 = 1.0;      ///< aspect parameter a/h

  /// Curvature-augmented friction 2/r0^2 + delta0 acting on u1.
  [[nodiscard]] double deltaP0() const { return 2.0 / (r0 * r0) + delta0; }
  /// Curvature-augmented friction 2/r0^2 + delta1 acting on u2.
  [[nodiscard]] double deltaP1() const { return 2.0 / (r0 * r0) + delta1; }

  [[nodiscard]] NondimParams with_R(double r) const {
    NondimParams p = *this;
    p.R = r;
    return p;
  }
};

/// Scaling laws: R = alphaT g (T0-T1) h^3/(kappa nu), Pr = nu/kappa,
/// delta_i = C_i h^4/nu, omega = 2 Omega h^2/kappa, r0 = a/h.
/// Throws ParameterError when a physical invariant is violated.
NondimParams nondimensionalize(const PhysicalParams& phys);

/// Returns `nd` unchanged when its invariants hold, throws ParameterError
/// naming the offending field otherwise.
NondimParams validate(const NondimParams& nd);

/// Validates a PhysicalParams record without converting it.
void validate(const PhysicalParams& phys);

std::string describe(const NondimParams& nd);

}  // namespace walker
