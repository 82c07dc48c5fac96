#pragma once

// Forcing of the perturbed channel: a zonal bottom-temperature deviation
// phi(x1) and an interior heat source Q. The inhomogeneous wall value is
// carried by the lift T_lift = phi(x1) (1 - z); the remainder of the
// temperature stays in the homogeneous sine basis.

#include <vector>

#include "walker/field.hpp"

namespace walker {

struct ForcingProfile {
  /// phi(x1) = sum_{k>=1} 2 Re(phi[k] e^{i k x1 / r0}); phi[0] must vanish.
  std::vector<cplx> phi;
  /// Heat source; only the temperature coefficients are read.
  SpectralState Q;
  /// Magnitude of the basic state once computed (weighted norm).
  double epsilon = 0.0;

  [[nodiscard]] bool is_zero() const;
};

/// No forcing on grid g.
ForcingProfile no_forcing(const Grid& g);
/// phi = amp cos(k x1 / r0).
ForcingProfile cosine_profile(const Grid& g, double amp, int k = 1);
/// Adds amp cos(k x1 / r0) sin(j pi z) to Q.
void add_heat_source(ForcingProfile& f, int k, int j, double amp);

/// Throws ParameterError for a nonzero zonal mean or a shape mismatch.
void validate(const ForcingProfile& f, const Grid& g);

/// T, Tx, Tz of the lift on the transform grid (velocity entries empty).
GradFields lift_fields(const ForcingProfile& f, const Transform& tr);

/// Lift value at a point, for output of the full temperature.
double lift_value(const ForcingProfile& f, const Grid& g, double x1, double z);

}  // namespace walker
