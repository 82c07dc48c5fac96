#pragma once

// Galerkin representation of divergence-free velocity + temperature on the
// periodic channel (0, 2 pi r0) x (r0, r0 + 1).
//
// With z = x2 - r0 and alpha = k / r0:
//   stream function  psi = sum_{k>=1,j>=1} 2 Re(psi_kj e^{i alpha x1}) sin(j pi z)
//   zonal mean flow   u1 += sum_{j=0..Nz} c_j cos(j pi z)
//   temperature       T   = sum_{k>=0,j>=1} (2 Re for k>=1) theta_kj e^{i alpha x1} sin(j pi z)
// and u1 = d psi / dx2, u2 = -d psi / dx1. Negative wavenumbers are implied
// by conjugate symmetry, so only k >= 0 is stored. The sine/cosine bases
// satisfy u2 = 0, du1/dx2 = 0 and T = 0 on both walls exactly.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace walker {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Discretization of the channel. Zonal wavenumbers |k| <= K with
/// K = floor((Nx - 1) / 3) are retained, which makes the quadratic products
/// formed on the Nx-point grid alias-free (the 2/3 rule). Vertical
/// quadrature uses Mz Gauss-Legendre nodes.
class Grid {
 public:
  Grid(double r0, int Nx, int Nz);

  [[nodiscard]] double r0() const { return r0_; }
  [[nodiscard]] int Nx() const { return Nx_; }
  [[nodiscard]] int Nz() const { return Nz_; }
  [[nodiscard]] int K() const { return (Nx_ - 1) / 3; }
  [[nodiscard]] int Mz() const { return 3 * Nz_ + 16; }
  [[nodiscard]] double Lx() const { return 2.0 * kPi * r0_; }
  [[nodiscard]] double alpha(int k) const { return k / r0_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double r0_;
  int Nx_;
  int Nz_;
};

/// Spectral coefficients of one state. Indices: psi(k, j) with k in 1..K,
/// j in 1..Nz; mean(j) with j in 0..Nz; theta(k, j) with k in 0..K,
/// j in 1..Nz (theta(0, j) is kept real).
class SpectralState {
 public:
  SpectralState() = default;
  SpectralState(int K, int Nz);
  explicit SpectralState(const Grid& g) : SpectralState(g.K(), g.Nz()) {}

  [[nodiscard]] int K() const { return K_; }
  [[nodiscard]] int Nz() const { return Nz_; }

  cplx& psi(int k, int j) { return psi_[idx(k, j)]; }
  [[nodiscard]] cplx psi(int k, int j) const { return psi_[idx(k, j)]; }
  cplx& theta(int k, int j) { return theta_[idx(k, j)]; }
  [[nodiscard]] cplx theta(int k, int j) const { return theta_[idx(k, j)]; }
  double& mean(int j) { return mean_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] double mean(int j) const { return mean_[static_cast<std::size_t>(j)]; }

  double time = 0.0;

  void set_zero();
  /// Restores the storage invariants: psi(0, *) = 0, Im theta(0, *) = 0.
  void enforce_reality();

  SpectralState& operator+=(const SpectralState& o);
  SpectralState& operator-=(const SpectralState& o);
  SpectralState& operator*=(double s);
  /// this += a * x
  void axpy(double a, const SpectralState& x);

  /// Real degrees of freedom: mean (Nz+1), theta(0,*) (Nz), then Re/Im of
  /// psi and theta for k >= 1.
  [[nodiscard]] std::size_t real_size() const;
  [[nodiscard]] Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& v);
  static SpectralState from_vector(int K, int Nz, const Eigen::VectorXd& v);

  /// Largest coefficient magnitude.
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool same_shape(const SpectralState& o) const { return K_ == o.K_ && Nz_ == o.Nz_; }

 private:
  [[nodiscard]] std::size_t idx(int k, int j) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(Nz_) + static_cast<std::size_t>(j - 1);
  }

  int K_ = 0;
  int Nz_ = 0;
  std::vector<cplx> psi_;
  std::vector<cplx> theta_;
  std::vector<double> mean_;
};

SpectralState operator+(SpectralState a, const SpectralState& b);
SpectralState operator-(SpectralState a, const SpectralState& b);
SpectralState operator*(double s, SpectralState a);

/// Samples on the Nx x Mz transform grid, stored x-major
/// (index n * Mz + m): x1 = n Lx / Nx, x2 = r0 + z_m (Gauss nodes).
struct PhysicalFields {
  int Nx = 0;
  int Mz = 0;
  std::vector<double> u1, u2, T;
};

/// Velocity and temperature together with their first derivatives.
struct GradFields {
  std::vector<double> u1, u2, T;
  std::vector<double> u1x, u1z, u2x, u2z, Tx, Tz;
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Precomputed transform tables for one grid. Immutable after construction
/// and safe to share between threads.
class Transform {
 public:
  explicit Transform(const Grid& g);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> z_nodes() const { return z_; }
  [[nodiscard]] std::span<const double> z_weights() const { return w_; }
  [[nodiscard]] std::size_t points() const {
    return static_cast<std::size_t>(grid_.Nx()) * static_cast<std::size_t>(grid_.Mz());
  }

  enum class Basis { Sin, Cos };

  /// Coefficient table (K+1) x (Nz+1) indexed [k * (Nz+1) + j], j = 0..Nz.
  using Coeffs = std::vector<cplx>;
  [[nodiscard]] Coeffs make_coeffs() const;

  /// out(x_n, z_m) = sum_k sum_j (2 Re for k >= 1) c_kj e^{i alpha x_n} B_j(z_m)
  void synthesize(const Coeffs& c, Basis b, std::span<double> out) const;
  /// c_kj = (1/Lx) integral g e^{-i alpha x} B_j(z) dx dz, by quadrature.
  void analyze(std::span<const double> g, Basis b, Coeffs& c) const;

  /// Velocity, temperature and their gradients of a state. `lift`, when
  /// non-null, is added to the temperature (inhomogeneous wall data).
  void gradients(const SpectralState& s, GradFields& out, const GradFields* lift = nullptr) const;
  [[nodiscard]] PhysicalFields fields(const SpectralState& s) const;

  /// Galerkin (Leray) projection of a momentum/temperature right-hand side
  /// (f1, f2, fT) given on the grid: the coefficient rates whose state is
  /// the L2-closest admissible field.
  [[nodiscard]] SpectralState project(std::span<const double> f1, std::span<const double> f2,
                                      std::span<const double> fT) const;

 private:
  Grid grid_;
  std::vector<double> z_, w_;
  // basis tables [j * Mz + m], j = 0..Nz, plain and weight-premultiplied
  std::vector<double> sin_, cos_, wsin_, wcos_;
  // zonal tables [k * Nx + n]
  std::vector<double> xc_, xs_;
};

/// Pointwise evaluation of the expansion (physical fields to transform grid).
PhysicalFields to_physical(const SpectralState& s, const Grid& g);
/// Galerkin projection of sampled fields; throws RepresentationError when
/// the fields are not representable (divergence, wall data or resolution)
/// to relative tolerance `tol`.
SpectralState to_spectral(const PhysicalFields& f, const Grid& g, double tol = 1e-8);

/// integral of u1 over x2; independent of x1 for every admissible state.
double vertical_integral_u1(const SpectralState& s);

/// Weighted inner product integral (u_a . u_b + w T_a T_b) dx over the channel.
double inner(const SpectralState& a, const SpectralState& b, const Grid& g, double weight);
double norm(const SpectralState& s, const Grid& g, double weight);

/// Default temperature weight Pr * R, in which the linear operator is
/// self-adjoint.
inline double default_weight(double Pr, double R) { return Pr * R; }

/// Stream function (including the mean-flow part) and its derivatives at a point.
struct PointValue {
  double psi, psi_x, psi_z, psi_xx, psi_xz, psi_zz;
  double T;
  [[nodiscard]] double u1() const { return psi_z; }
  [[nodiscard]] double u2() const { return -psi_x; }
};
/// x1 in physical units, z = x2 - r0 in [0, 1].
PointValue evaluate(const SpectralState& s, const Grid& g, double x1, double z);

/// The state translated zonally by dx: f(x1) -> f(x1 - dx).
SpectralState shift(const SpectralState& s, const Grid& g, double dx);

/// Dealiased reality-respecting random state, coefficients uniform in
/// [-amp, amp] on |k| <= kmax.
SpectralState random_state(const Grid& g, std::mt19937_64& rng, double amp, int kmax);

}  // namespace walker
