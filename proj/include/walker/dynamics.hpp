#pragma once

// Nonlinear evolution of the stream-function/temperature system
//   u_t = Pr (Lap u - dP . u + R T e2) + N_u,   T_t = Lap T + u2 + N_T
// projected onto the Galerkin basis. The rotation and (2/r0) d/dx1 terms
// are gradients and vanish under the projection. N is the advection plus
// curvature nonlinearity
//   N(a, b) = -[(a.grad) b1 + a1 b2 / r0, (a.grad) b2 - a1 b1 / r0, (a.grad) Tb].

#include <optional>
#include <string>
#include <vector>

#include "walker/field.hpp"
#include "walker/forcing.hpp"
#include "walker/linstab.hpp"
#include "walker/params.hpp"

namespace walker::dynamics {

struct RunConfig {
  double dt = 1e-3;
  double t_end = 100.0;
  /// relative state change per unit time below which the run is steady
  double convergence_tol = 1e-8;
  /// weighted tendency norm threshold (relative to max(1, |s|))
  double tendency_tol = 1e-9;
  /// <= 0 disables snapshots
  double snapshot_interval = 0.0;
  /// steps between diagnostic records
  int diag_every = 100;
  /// stop as soon as a steady state is detected
  bool stop_when_steady = true;
  /// stop when the weighted norm falls below this (decay to rest)
  double rest_norm = 0.0;
  double cfl_max = 0.5;
};

enum class Verdict { Steady, Periodic, Transient };
std::string to_string(Verdict v);

struct Diagnostic {
  double t = 0.0;
  double energy = 0.0;  ///< half the weighted squared norm
  double norm = 0.0;
  double amp_r = 0.0;
  double amp_theta = 0.0;
  double mean_flow = 0.0;
  double tendency_norm = 0.0;
};

struct Snapshot {
  double t = 0.0;
  SpectralState state;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<Diagnostic> diagnostics;
  SpectralState final_state;
  Verdict verdict = Verdict::Transient;
  double final_tendency = 0.0;
  long steps = 0;
  double dt_used = 0.0;
  std::vector<std::string> warnings;
};

struct Amplitude {
  double r = 0.0;
  double theta = 0.0;
};

/// Right-hand side evaluator with cached transforms and forcing terms.
class Model {
 public:
  Model(const NondimParams& p, const Grid& g);
  Model(const NondimParams& p, const Grid& g, const ForcingProfile& f);

  [[nodiscard]] const NondimParams& params() const { return p_; }
  [[nodiscard]] const Grid& grid() const { return g_; }
  [[nodiscard]] const Transform& transform() const { return tr_; }
  [[nodiscard]] bool forced() const { return forced_; }
  [[nodiscard]] const ForcingProfile& forcing() const { return f_; }
  /// Temperature weight of the norms reported by this model.
  [[nodiscard]] double weight() const;

  /// Changes R (and the dependent forcing terms) in place.
  void set_R(double R);

  /// Full Galerkin tendency.
  [[nodiscard]] SpectralState tendency(const SpectralState& s) const;
  /// Diagonal (diffusive + friction) part.
  [[nodiscard]] SpectralState diagonal(const SpectralState& s) const;
  /// Everything else: buoyancy coupling, nonlinearity, lift advection, forcing.
  [[nodiscard]] SpectralState explicit_part(const SpectralState& s) const;
  /// Linear part (diagonal + buoyancy coupling), no forcing.
  [[nodiscard]] SpectralState linear(const SpectralState& s) const;
  /// Projected bilinear form N(a, b).
  [[nodiscard]] SpectralState bilinear(const SpectralState& a, const SpectralState& b) const;
  /// Projected -(a.grad) T_lift; zero without forcing.
  [[nodiscard]] SpectralState lift_advection(const SpectralState& a) const;
  /// Constant forcing: buoyancy of the lift, its diffusion, and Q.
  [[nodiscard]] const SpectralState& source() const { return source_; }

  /// Dense Jacobian of the tendency at y in packed real coordinates.
  [[nodiscard]] Eigen::MatrixXd jacobian(const SpectralState& y) const;

  /// Largest |u| on the transform grid.
  [[nodiscard]] double max_speed(const SpectralState& s) const;

 private:
  void rebuild_source();

  NondimParams p_;
  Grid g_;
  Transform tr_;
  ForcingProfile f_;
  bool forced_ = false;
  GradFields lift_;
  SpectralState lift_buoy_;  // projection of (0, T_lift, 0)
  SpectralState lift_heat_;  // projection of (0, 0, Lap T_lift) + Q
  SpectralState source_;
};

SpectralState tendency(const SpectralState& s, const NondimParams& p, const Grid& g);

/// Two-level IMEX stepper (Crank-Nicolson on the diagonal part, AB2 on the
/// rest, midpoint bootstrap for the first step).
class Stepper {
 public:
  Stepper(const Model& m, double dt);
  /// Advances s by one step. Throws NumericError on non-finite values.
  void step(SpectralState& s);
  void reset() { have_prev_ = false; }
  [[nodiscard]] double dt() const { return dt_; }
  void set_dt(double dt);
  /// Tendency at the state before the most recent step.
  [[nodiscard]] const SpectralState& last_explicit() const { return prev_; }

 private:
  const Model& m_;
  double dt_;
  bool have_prev_ = false;
  SpectralState prev_;
};

/// One step from rest history (always bootstraps).
SpectralState step(const SpectralState& s, const Model& m, double dt);

Trajectory integrate(const SpectralState& s0, const Model& m, const RunConfig& cfg,
                     const linstab::CriticalPair* pair = nullptr);

/// Projection amplitude and phase onto span{psi1, psi1~}.
Amplitude amplitude_of(const SpectralState& s, const linstab::CriticalPair& pair, const Grid& g);

/// Seeded random initial condition localized at |k| <= kmax with amplitude
/// amp / j^2.
SpectralState random_ic(const Grid& g, std::uint64_t seed, double amp, int kmax);

/// CSV of the diagnostics records.
std::string diagnostics_csv(const Trajectory& tr);

}  // namespace walker::dynamics
