#pragma once

// Steady states of the forced channel and their parameter dependence:
// Newton solves for the basic state, the spectrum of the linearization about
// it, pseudo-arclength continuation with fold location, and Hopf detection.
// The continuation and Hopf machinery works on any SteadyProblem, so the
// same code is exercised on scalar and planar normal forms.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "walker/dynamics.hpp"
#include "walker/forcing.hpp"
#include "walker/linstab.hpp"

namespace walker::continuation {

/// F(x, lambda) = 0 with optional extra unknowns/equations (phase conditions).
class SteadyProblem {
 public:
  virtual ~SteadyProblem() = default;
  [[nodiscard]] virtual int dim() const = 0;
  [[nodiscard]] virtual Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const = 0;
  /// Defaults to central differences.
  [[nodiscard]] virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const;
  [[nodiscard]] virtual Eigen::VectorXd dlambda(const Eigen::VectorXd& x, double lambda) const;
  /// Matrix whose eigenvalues decide stability (the Jacobian unless the
  /// problem carries auxiliary unknowns).
  [[nodiscard]] virtual Eigen::MatrixXd stability_matrix(const Eigen::VectorXd& x, double lambda) const {
    return jacobian(x, lambda);
  }
  /// Scalar measure reported along branches.
  [[nodiscard]] virtual double amplitude(const Eigen::VectorXd& x) const { return x.norm(); }
  /// Norm used for residual tests.
  [[nodiscard]] virtual double residual_norm(const Eigen::VectorXd& r) const { return r.norm(); }
};

/// u' = lambda u + b u^2 - u^3.
class ScalarFold : public SteadyProblem {
 public:
  explicit ScalarFold(double b) : b_(b) {}
  [[nodiscard]] int dim() const override { return 1; }
  [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::VectorXd dlambda(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] double amplitude(const Eigen::VectorXd& x) const override { return x[0]; }

 private:
  double b_;
};

/// z' = (mu + i rho0) z - |z|^2 z in real coordinates; lambda = mu.
class HopfNormalForm : public SteadyProblem {
 public:
  explicit HopfNormalForm(double rho0) : rho0_(rho0) {}
  [[nodiscard]] int dim() const override { return 2; }
  [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] double rho0() const { return rho0_; }

 private:
  double rho0_;
};

/// Forced channel with lambda = R. Unknowns: the packed SpectralState, plus a
/// zonal drift speed c when a phase condition against `reference` is set
/// (translation-invariant case): F(y) + c dy/dx1 = 0, <dref/dx1, y - ref> = 0.
class ChannelProblem : public SteadyProblem {
 public:
  ChannelProblem(const NondimParams& p, const Grid& g, const ForcingProfile& f);
  void set_phase_reference(const SpectralState& ref);
  [[nodiscard]] bool has_phase() const { return phase_; }

  [[nodiscard]] int dim() const override;
  [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::VectorXd dlambda(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] Eigen::MatrixXd stability_matrix(const Eigen::VectorXd& x, double lambda) const override;
  [[nodiscard]] double amplitude(const Eigen::VectorXd& x) const override;
  [[nodiscard]] double residual_norm(const Eigen::VectorXd& r) const override;

  [[nodiscard]] SpectralState state(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd vec(const SpectralState& s) const;
  [[nodiscard]] const Grid& grid() const { return g_; }
  [[nodiscard]] double weight() const { return w_; }
  /// Dense Jacobian of the tendency at y (no phase border).
  [[nodiscard]] Eigen::MatrixXd tendency_jacobian(const SpectralState& y, double R) const;

 private:
  dynamics::Model& model_at(double R) const;

  NondimParams p_;
  Grid g_;
  ForcingProfile f_;
  mutable std::unique_ptr<dynamics::Model> model_;
  double w_;
  bool phase_ = false;
  SpectralState ref_;
  Eigen::VectorXd dref_;  // packed d ref / dx1
};

struct NewtonReport {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

/// Damped Newton on F(., lambda). Throws ConvergenceError with the residual
/// history when `max_iter` is exhausted.
NewtonReport newton(const SteadyProblem& prob, Eigen::VectorXd x0, double lambda, double tol = 1e-10,
                    int max_iter = 30);

struct BasicState {
  SpectralState state;  ///< V and J in the homogeneous basis (J excludes the lift)
  double R = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double epsilon = 0.0;  ///< weighted norm of the solution
  std::vector<std::string> warnings;
};

/// Newton from `guess` (zero when null); when that fails, marches in R from
/// R / 2 with the previous solution as the initial guess.
BasicState basic_state(const NondimParams& p, const Grid& g, const ForcingProfile& f, double tol = 1e-10,
                       const SpectralState* guess = nullptr);

struct Spectrum {
  std::vector<cplx> eigenvalues;  ///< by real part descending
  std::vector<SpectralState> modes;
};

/// Leading nev eigenpairs of L_R + L^eps(bs) with R = p.R; bs may have been
/// computed at a different R (frozen perturbation).
Spectrum perturbed_spectrum(const NondimParams& p, const Grid& g, const ForcingProfile& f, const BasicState& bs,
                            int nev);

struct PerturbedCritical {
  double R = 0.0;
  BasicState basic;
  std::vector<cplx> leading;  ///< leading eigenvalues at R
  double splitting = 0.0;     ///< |beta_1 - beta_2| at R
};

/// First R in [lo, hi] at which the leading eigenvalue of L_R + L^eps(bs),
/// with the basic state frozen, crosses zero (scan with n samples, then
/// bisection to rtol). Throws NumericError when no crossing is found.
PerturbedCritical perturbed_critical(const NondimParams& p, const Grid& g, const ForcingProfile& f,
                                     const BasicState& bs, double lo, double hi, int n = 12, double rtol = 1e-10);

struct BranchPoint {
  Eigen::VectorXd x;
  double lambda = 0.0;
  double s = 0.0;
  double dlambda_ds = 0.0;
  double amplitude = 0.0;
  int index = 0;  ///< eigenvalues with positive real part
  std::vector<cplx> leading;
};

struct FoldPoint {
  Eigen::VectorXd x;
  double lambda = 0.0;
  Eigen::VectorXd tangent;
  double min_real_eig = 0.0;  ///< smallest |Re| among real eigenvalues at the fold
  int index_before = 0;
  int index_after = 0;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<FoldPoint> folds;
  std::vector<std::string> notes;
};

struct ContinuationOptions {
  double ds = 0.05;
  double ds_min = 1e-8;
  double ds_max = 0.5;
  int max_steps = 2000;
  double tol = 1e-10;
  int max_corrector = 12;
  int n_leading = 6;
  double index_tol = 1e-9;
};

/// Pseudo-arclength continuation from (x0, lambda_start) until lambda leaves
/// the interval towards lambda_end. Folds are refined by bisection on the step.
Branch continue_branch(const SteadyProblem& prob, const Eigen::VectorXd& x0, double lambda_start,
                       double lambda_end, const ContinuationOptions& opt = {});

struct HopfPoint {
  Eigen::VectorXd x;
  double lambda = 0.0;
  double frequency = 0.0;
  cplx pair{};
};

/// Scans steady states over [lo, hi] (n samples) and bisects the real part
/// of a complex pair with |Im| > im_floor crossing zero.
std::optional<HopfPoint> detect_hopf(const SteadyProblem& prob, const Eigen::VectorXd& x0, double lo, double hi,
                                     int n = 40, double im_floor = 1e-6, double tol = 1e-12);

struct AmplitudeFit {
  double c = 0.0;
  double p = 0.0;
  double r2 = 0.0;
  double linear_a = 0.0;   ///< least squares A = a (R - Rc)
  double linear_r2 = 0.0;
  bool reportable = false;  ///< r2 > 0.99
};

/// Fits A = c (lambda - lambda_c)^p in log-log coordinates.
AmplitudeFit periodic_amplitude_fit(const std::vector<double>& lambda, const std::vector<double>& amplitude,
                                    double lambda_c);

/// Half peak-to-peak of the trailing `fraction` of a signal.
double oscillation_amplitude(const std::vector<double>& signal, double fraction = 0.5);
/// Mean frequency (angular) from upward zero crossings of signal - mean.
double oscillation_frequency(const std::vector<double>& t, const std::vector<double>& signal, double fraction = 0.5);

/// RK4 trajectory of the planar Hopf normal form; returns x(t) samples.
std::vector<double> hopf_trajectory(const HopfNormalForm& nf, double mu, double t_end, double dt,
                                    std::vector<double>* t = nullptr);

}  // namespace walker::continuation
