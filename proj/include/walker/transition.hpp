#pragma once

// Center-manifold reduction at the first critical Rayleigh number and the
// classification of the resulting dynamic transition.
//
// Three quantities share the Greek letter alpha in the usual presentations;
// here they are alpha_wav (zonal wavenumber k / r0), alpha_t (transition
// number, leading reduced coefficient).

#include <optional>
#include <string>
#include <vector>

#include "walker/dynamics.hpp"
#include "walker/field.hpp"
#include "walker/linstab.hpp"

namespace walker::transition {

struct CenterManifoldField {
  SpectralState Psi;
  double residual = 0.0;       ///< |-L Psi - P G(psi1, psi1)| / |P G(psi1, psi1)|
  double orth_psi1 = 0.0;      ///< <Psi, psi1> / |Psi|
  double orth_psi1t = 0.0;     ///< <Psi, psi1~> / |Psi|
  std::vector<int> wavenumbers;  ///< zonal wavenumbers present in Psi
};

/// Solves -L_Rc Psi = P G(e1, e1) on the complement of span{psi1, psi1~}.
/// `model` must be at R = Rc. Throws NumericError when a block other than
/// the critical one has an eigenvalue within `cond_tol` of zero.
CenterManifoldField center_manifold_leading(const dynamics::Model& model, const linstab::CriticalPair& pair,
                                            const SpectralState& e1, double cond_tol = 1e-8);
CenterManifoldField center_manifold_leading(const dynamics::Model& model, const linstab::CriticalPair& pair);

struct TransitionNumber {
  double alpha_t = 0.0;       ///< <G(Psi, e1) + G(e1, Psi), e1> / |e1|^2
  double alpha_route2 = 0.0;  ///< -<G(e1, e1), Psi> / |e1|^2
  double alpha_route3 = 0.0;  ///< -<-L Psi, Psi> / |e1|^2
  double quadratic = 0.0;     ///< <G(e1, e1), e1> / |e1|^3 (vanishes by wavenumber selection)
  int k_order = 3;
  double weight = 0.0;
  CenterManifoldField cm;
  linstab::CriticalPair pair;
};

struct TransitionOptions {
  /// Temperature weight; Pr Rc when unset.
  std::optional<double> weight;
  /// e1 = cos(phase) psi1 + sin(phase) psi1~
  double phase = 0.0;
  /// e1 scaled by this factor (homogeneity checks)
  double scale = 1.0;
};

TransitionNumber transition_number(const NondimParams& p, const Grid& g, const TransitionOptions& opt = {});

struct BetaSample {
  double lambda = 0.0;
  double beta = 0.0;
};

/// Scalar reduced model x' = beta1(lambda) x + alpha_t x^k near lambda0.
struct ReducedModel {
  double lambda0 = 0.0;
  std::vector<BetaSample> beta1;
  double slope = 0.0;      ///< fitted d beta1 / d lambda
  double intercept = 0.0;  ///< fitted beta1(lambda0)
  double alpha_t = 0.0;
  int k_order = 3;
  SpectralState e1, e1star;

  [[nodiscard]] double beta_at(double lambda) const { return intercept + slope * (lambda - lambda0); }
};

/// Reduced model of the idealized channel: lambda = R, beta1 from five
/// linear-stability samples in [0.98 Rc, 1.02 Rc].
ReducedModel reduced_model(const NondimParams& p, const Grid& g);
/// Synthetic reduced model with beta1 = slope (lambda - lambda0).
ReducedModel normal_form(int k_order, double alpha_t, double slope, double lambda0 = 0.0);

enum class TransitionType { I, II, III };
std::string to_string(TransitionType t);

struct BranchPrediction {
  bool above = true;       ///< branch exists for lambda > lambda0
  int count = 2;           ///< number of bifurcated points on that side
  double coefficient = 0;  ///< amplitude = coefficient |lambda - lambda0|^{1/(k-1)}
  double sign = 0.0;       ///< sign of the single point (Type III); 0 for symmetric pairs
  std::string stability;   ///< "attractor" or "saddle"
};

struct TransitionReport {
  TransitionType type = TransitionType::I;
  double lambda0 = 0.0;
  double alpha_t = 0.0;
  int k_order = 3;
  std::vector<BranchPrediction> branches;
  std::vector<std::string> notes;
};

/// Type from (k parity, sign alpha_t). Throws NumericError when alpha_t = 0
/// or the crossing is not transversal.
TransitionReport classify(const ReducedModel& rm);

/// Amplitudes |beta1(lambda) / alpha_t|^{1/(k-1)} of the bifurcated points at lambda (empty on the
/// side without branches), signed.
std::vector<double> branch_points(const TransitionReport& rep, const ReducedModel& rm, double lambda);

struct OracleLambda {
  double lambda = 0.0;
  std::vector<double> attractors;  ///< limits of forward integrations (0 included when it attracts)
  std::vector<double> repellers;   ///< nonzero limits of backward integrations
  int escaped = 0;                 ///< forward runs leaving |x| < escape radius
  int converged = 0;
};

struct OracleResult {
  std::vector<OracleLambda> per_lambda;
  TransitionType observed = TransitionType::I;
  bool consistent = false;  ///< observed behavior fits one of the three types
};

/// Brute-force RK4 integration of x' = slope lambda x + alpha x^k from a fan
/// of initial conditions on every lambda of the grid.
OracleResult normal_form_oracle(int k_order, double alpha_t, double slope, const std::vector<double>& lambdas,
                                double escape = 1.5);

struct PredictedBranch {
  double R = 0.0;
  double beta1 = 0.0;
  double r = 0.0;      ///< |beta1 / alpha_t|^{1/2}
  SpectralState state;  ///< r psi1~ translated by -theta
  /// Velocity of the leading-order state written as
  ///   (pi A cos(a(x1 + theta)) cos(pi z), a A sin(a(x1 + theta)) sin(pi z)),
  /// A = r h with h the sin(pi z) amplitude of the unit-norm mode.
  double e0_amplitude = 0.0;
  double alpha_wav = 0.0;
  double theta = 0.0;
};

/// Leading-order steady state at R in (Rc, Rc + delta) with zonal phase theta.
PredictedBranch predict_branch(const NondimParams& p, const Grid& g, double R, double theta,
                               const TransitionNumber& tn);

/// Velocity of e0 at a point.
std::pair<double, double> e0_velocity(const PredictedBranch& b, double x1, double z);

}  // namespace walker::transition
