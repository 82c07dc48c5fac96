#pragma once

// Linear stability of the motionless state of the idealized channel (no
// bottom temperature deviation, no heat source).
//
// For zonal wavenumber k (alpha = k / r0) and vertical mode j the stream
// function / temperature pair sin(j pi z) e^{i alpha x1} is an exact
// eigenfunction, and the neutral Rayleigh number has the closed form
//   R(alpha, j) = q (q^2 + dP0 (j pi)^2 + dP1 alpha^2) / alpha^2,
//   q = (j pi)^2 + alpha^2.
// The Galerkin blocks assembled here do not use that form: they are built
// by quadrature from the primitive operators, including the rotation and
// curvature-coupling terms, so the closed form serves as an oracle.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "walker/field.hpp"
#include "walker/params.hpp"

namespace walker::linstab {

struct ModeIndex {
  int k = 1;  ///< zonal wavenumber, alpha = k / r0
  int j = 1;  ///< vertical mode
};

/// Closed-form neutral Rayleigh number with explicit curvature-augmented
/// friction coefficients (so dP = 0 can be forced for the classical limit).
double marginal_rayleigh(double alpha, int j, double dP0, double dP1);
/// Throws ParameterError for k < 1 or j < 1 (the k = 0 block never
/// becomes unstable).
double marginal_rayleigh(ModeIndex m, const NondimParams& p);

struct ContinuousMinimum {
  double alpha = 0.0;
  double R = 0.0;
};
/// Minimum of the closed form over continuous alpha > 0.
ContinuousMinimum minimize_marginal(int j, double dP0, double dP1);

struct CriticalPoint0 {
  double Rc = 0.0;
  int kc = 0;
  int multiplicity = 2;
  bool degenerate = false;
  int k_tie = 0;  ///< second minimizing wavenumber when degenerate
};

/// Minimum of the closed form over integer k in [1, kmax], j = 1. Throws
/// NumericError when the minimum sits on kmax (window too small).
CriticalPoint0 critical_rayleigh(const NondimParams& p, int kmax);

/// Galerkin matrices of one zonal block of the linearized equations,
/// K x = beta M x, with the velocity rows carrying 1/Pr in M.
/// Unknowns: k >= 1: [psi_{k,1..Nz}, theta_{k,1..Nz}];
///           k = 0:  [c_{0..Nz}, theta_{0,1..Nz}].
struct LinearBlock {
  int k = 0;
  Eigen::MatrixXcd K;
  Eigen::MatrixXcd M;
  /// Gram matrix of the weighted inner product (temperature weight w).
  Eigen::MatrixXcd W;
  /// M^{-1} K: the block of d/dt acting on coefficients.
  [[nodiscard]] Eigen::MatrixXcd op() const;
};

LinearBlock assemble_linear_block(const NondimParams& p, double R, int k, const Grid& g,
                                  double weight);
inline LinearBlock assemble_linear_block(const NondimParams& p, double R, int k, const Grid& g) {
  return assemble_linear_block(p, R, k, g, default_weight(p.Pr, R));
}

struct EigenPair {
  cplx beta{};
  SpectralState state;
  double R = 0.0;
  int k = 0;
};

/// Eigenvalues of one block, sorted by real part descending.
Eigen::VectorXcd block_eigenvalues(const NondimParams& p, double R, int k, const Grid& g);

/// Leading `nev` eigenpairs over all wavenumber blocks 0..K, by real part
/// descending. Each k >= 1 eigenvalue appears twice (the cos/sin pair).
/// Eigenvectors have unit weighted norm and a real positive (k, 1)
/// temperature coefficient (the second of each pair is shifted a quarter
/// wavelength).
std::vector<EigenPair> eigen_spectrum(const NondimParams& p, double R, int nev, const Grid& g);

/// Largest real part over all blocks.
double leading_growth_rate(const NondimParams& p, double R, const Grid& g);

/// Critical Rayleigh number found from the discretized blocks alone: for
/// each k in [1, kmax] the root of the block's leading eigenvalue is
/// bracketed and bisected.
CriticalPoint0 numeric_critical_rayleigh(const NondimParams& p, const Grid& g, int kmax);

struct PesReport {
  double R_cross = 0.0;      ///< bisection-located zero of the leading eigenvalue
  double Rc_closed = 0.0;    ///< closed-form value for comparison
  double rel_error = 0.0;    ///< |R_cross - Rc_closed| / Rc_closed
  int crossing_count = 0;    ///< eigenvalues with |beta| < crossing_tol at R_cross
  double next_eigenvalue = 0.0;  ///< first eigenvalue after the crossing ones
  double slope = 0.0;        ///< d beta_1 / dR at the crossing
  bool ok = false;
};

/// Locates the exchange of stability in (Rlo, Rhi). Throws NumericError
/// when the leading eigenvalue does not change sign in the window.
PesReport verify_pes(const NondimParams& p, double Rlo, double Rhi, const Grid& g,
                     double crossing_tol = 1e-8);

/// The unit-normalized critical pair (psi1, psi1~) at Rc. psi1 has a real
/// positive temperature coefficient at (kc, 1); psi1~ is psi1 shifted by a
/// quarter wavelength.
struct CriticalPair {
  CriticalPoint0 crit;
  EigenPair psi1;
  EigenPair psi1_tilde;
  double weight = 0.0;  ///< temperature weight of the normalization
};
CriticalPair critical_pair(const NondimParams& p, const Grid& g, int kmax);

/// Sign/phase convention and unit weighted norm applied to a block
/// eigenvector placed into a state.
SpectralState normalized_mode(const Eigen::VectorXcd& v, int k, const Grid& g, double weight);

}  // namespace walker::linstab
