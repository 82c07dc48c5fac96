#include "walker/field.hpp"

#include <algorithm>
#include <cmath>

#include "walker/error.hpp"
#include "walker/kernels.hpp"

namespace walker {

Grid::Grid(double r0, int Nx, int Nz) : r0_(r0), Nx_(Nx), Nz_(Nz) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw ParameterError("grid: r0 must be positive");
  if (Nx < 4 || Nx % 2 != 0) throw ParameterError("grid: Nx must be even and >= 4");
  if (Nz < 2) throw ParameterError("grid: Nz must be >= 2");
}

// ---------------------------------------------------------------------------
// SpectralState

SpectralState::SpectralState(int K, int Nz)
    : K_(K),
      Nz_(Nz),
      psi_(static_cast<std::size_t>((K + 1) * Nz)),
      theta_(static_cast<std::size_t>((K + 1) * Nz)),
      mean_(static_cast<std::size_t>(Nz + 1), 0.0) {
  if (K < 1 || Nz < 1) throw RepresentationError("state: need K >= 1 and Nz >= 1");
}

void SpectralState::set_zero() {
  std::fill(psi_.begin(), psi_.end(), cplx{});
  std::fill(theta_.begin(), theta_.end(), cplx{});
  std::fill(mean_.begin(), mean_.end(), 0.0);
}

void SpectralState::enforce_reality() {
  for (int j = 1; j <= Nz_; ++j) {
    psi(0, j) = 0.0;
    theta(0, j) = theta(0, j).real();
  }
}

SpectralState& SpectralState::operator+=(const SpectralState& o) {
  axpy(1.0, o);
  return *this;
}

SpectralState& SpectralState::operator-=(const SpectralState& o) {
  axpy(-1.0, o);
  return *this;
}

SpectralState& SpectralState::operator*=(double s) {
  for (auto& v : psi_) v *= s;
  for (auto& v : theta_) v *= s;
  for (auto& v : mean_) v *= s;
  return *this;
}

void SpectralState::axpy(double a, const SpectralState& x) {
  if (!same_shape(x)) throw RepresentationError("state: shape mismatch");
  for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] += a * x.psi_[i];
  for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] += a * x.theta_[i];
  for (std::size_t i = 0; i < mean_.size(); ++i) mean_[i] += a * x.mean_[i];
}

std::size_t SpectralState::real_size() const {
  return static_cast<std::size_t>(Nz_ + 1 + Nz_ + 4 * K_ * Nz_);
}

Eigen::VectorXd SpectralState::pack() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(real_size()));
  Eigen::Index i = 0;
  for (int j = 0; j <= Nz_; ++j) v[i++] = mean(j);
  for (int j = 1; j <= Nz_; ++j) v[i++] = theta(0, j).real();
  for (int k = 1; k <= K_; ++k)
    for (int j = 1; j <= Nz_; ++j) {
      v[i++] = psi(k, j).real();
      v[i++] = psi(k, j).imag();
    }
  for (int k = 1; k <= K_; ++k)
    for (int j = 1; j <= Nz_; ++j) {
      v[i++] = theta(k, j).real();
      v[i++] = theta(k, j).imag();
    }
  return v;
}

void SpectralState::unpack(const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != real_size()) {
    throw RepresentationError("state: packed vector has wrong length");
  }
  Eigen::Index i = 0;
  for (int j = 0; j <= Nz_; ++j) mean(j) = v[i++];
  for (int j = 1; j <= Nz_; ++j) theta(0, j) = v[i++];
  for (int k = 1; k <= K_; ++k)
    for (int j = 1; j <= Nz_; ++j) {
      psi(k, j) = {v[i], v[i + 1]};
      i += 2;
    }
  for (int k = 1; k <= K_; ++k)
    for (int j = 1; j <= Nz_; ++j) {
      theta(k, j) = {v[i], v[i + 1]};
      i += 2;
    }
  for (int j = 1; j <= Nz_; ++j) psi(0, j) = 0.0;
}

SpectralState SpectralState::from_vector(int K, int Nz, const Eigen::VectorXd& v) {
  SpectralState s(K, Nz);
  s.unpack(v);
  return s;
}

double SpectralState::max_abs() const {
  double m = 0.0;
  for (const auto& v : psi_) m = std::max(m, std::abs(v));
  for (const auto& v : theta_) m = std::max(m, std::abs(v));
  for (const auto& v : mean_) m = std::max(m, std::abs(v));
  return m;
}

SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }
SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
SpectralState operator*(double s, SpectralState a) { return a *= s; }

// ---------------------------------------------------------------------------
// Quadrature

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1], ascending order
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = 0.5 * (1.0 - x);
    nodes[hi] = 0.5 * (1.0 + x);
    weights[lo] = 0.5 * w;
    weights[hi] = 0.5 * w;
  }
}

// ---------------------------------------------------------------------------
// Transform

Transform::Transform(const Grid& g) : grid_(g) {
  const int Mz = g.Mz();
  const int Nz = g.Nz();
  const int Nx = g.Nx();
  const int K = g.K();
  gauss_legendre01(Mz, z_, w_);
  const auto nb = static_cast<std::size_t>((Nz + 1) * Mz);
  sin_.resize(nb);
  cos_.resize(nb);
  wsin_.resize(nb);
  wcos_.resize(nb);
  for (int j = 0; j <= Nz; ++j)
    for (int m = 0; m < Mz; ++m) {
      const auto i = static_cast<std::size_t>(j * Mz + m);
      const double arg = j * kPi * z_[static_cast<std::size_t>(m)];
      sin_[i] = std::sin(arg);
      cos_[i] = std::cos(arg);
      wsin_[i] = w_[static_cast<std::size_t>(m)] * sin_[i];
      wcos_[i] = w_[static_cast<std::size_t>(m)] * cos_[i];
    }
  xc_.resize(static_cast<std::size_t>((K + 1) * Nx));
  xs_.resize(xc_.size());
  for (int k = 0; k <= K; ++k)
    for (int n = 0; n < Nx; ++n) {
      // exact reduction of k n mod Nx keeps the tables symmetric
      const int r = (k * n) % Nx;
      const double arg = 2.0 * kPi * r / Nx;
      xc_[static_cast<std::size_t>(k * Nx + n)] = std::cos(arg);
      xs_[static_cast<std::size_t>(k * Nx + n)] = std::sin(arg);
    }
}

Transform::Coeffs Transform::make_coeffs() const {
  return Coeffs(static_cast<std::size_t>((grid_.K() + 1) * (grid_.Nz() + 1)));
}

void Transform::synthesize(const Coeffs& c, Basis b, std::span<double> out) const {
  const auto& kt = kernels::active();
  const int Mz = grid_.Mz();
  const int Nz = grid_.Nz();
  const int Nx = grid_.Nx();
  const int K = grid_.K();
  const auto mz = static_cast<std::size_t>(Mz);
  const double* basis = (b == Basis::Sin) ? sin_.data() : cos_.data();
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> re(mz), im(mz);
  for (int k = 0; k <= K; ++k) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    bool any = false;
    for (int j = (b == Basis::Sin ? 1 : 0); j <= Nz; ++j) {
      const cplx v = c[static_cast<std::size_t>(k * (Nz + 1) + j)];
      if (v == cplx{}) continue;
      any = true;
      const double* row = basis + static_cast<std::size_t>(j) * mz;
      kt.axpy(mz, v.real(), row, re.data());
      if (k > 0) kt.axpy(mz, v.imag(), row, im.data());
    }
    if (!any) continue;
    const double f = (k == 0) ? 1.0 : 2.0;
    for (int n = 0; n < Nx; ++n) {
      const auto t = static_cast<std::size_t>(k * Nx + n);
      double* dst = out.data() + static_cast<std::size_t>(n) * mz;
      if (k == 0) {
        kt.axpy(mz, 1.0, re.data(), dst);
      } else {
        kt.axpy2(mz, f * xc_[t], re.data(), -f * xs_[t], im.data(), dst);
      }
    }
  }
}

void Transform::analyze(std::span<const double> g, Basis b, Coeffs& c) const {
  const auto& kt = kernels::active();
  const int Mz = grid_.Mz();
  const int Nz = grid_.Nz();
  const int Nx = grid_.Nx();
  const int K = grid_.K();
  const auto mz = static_cast<std::size_t>(Mz);
  const double* basis = (b == Basis::Sin) ? wsin_.data() : wcos_.data();
  c.assign(static_cast<std::size_t>((K + 1) * (Nz + 1)), cplx{});
  std::vector<double> re(mz), im(mz);
  const double inv = 1.0 / Nx;
  for (int k = 0; k <= K; ++k) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (int n = 0; n < Nx; ++n) {
      const auto t = static_cast<std::size_t>(k * Nx + n);
      const double* src = g.data() + static_cast<std::size_t>(n) * mz;
      kt.axpy(mz, inv * xc_[t], src, re.data());
      if (k > 0) kt.axpy(mz, -inv * xs_[t], src, im.data());
    }
    for (int j = (b == Basis::Sin ? 1 : 0); j <= Nz; ++j) {
      const double* row = basis + static_cast<std::size_t>(j) * mz;
      const double a = kt.dot(mz, row, re.data());
      const double bb = (k > 0) ? kt.dot(mz, row, im.data()) : 0.0;
      c[static_cast<std::size_t>(k * (Nz + 1) + j)] = {a, bb};
    }
  }
}

void Transform::gradients(const SpectralState& s, GradFields& out, const GradFields* lift) const {
  const int K = grid_.K();
  const int Nz = grid_.Nz();
  if (s.K() != K || s.Nz() != Nz) throw RepresentationError("transform: state/grid shape mismatch");
  const std::size_t np = points();
  Coeffs u1 = make_coeffs(), u2 = u1, u1x = u1, u1z = u1, u2x = u1, u2z = u1, T = u1, Tx = u1, Tz = u1;
  const cplx I{0.0, 1.0};
  auto at = [Nz](int k, int j) { return static_cast<std::size_t>(k * (Nz + 1) + j); };
  for (int j = 0; j <= Nz; ++j) {
    const double jp = j * kPi;
    u1[at(0, j)] = s.mean(j);
    u1z[at(0, j)] = -jp * s.mean(j);
  }
  for (int j = 1; j <= Nz; ++j) {
    const double jp = j * kPi;
    T[at(0, j)] = s.theta(0, j).real();
    Tz[at(0, j)] = jp * s.theta(0, j).real();
  }
  for (int k = 1; k <= K; ++k) {
    const double a = grid_.alpha(k);
    for (int j = 1; j <= Nz; ++j) {
      const double jp = j * kPi;
      const cplx p = s.psi(k, j);
      const cplx th = s.theta(k, j);
      u1[at(k, j)] = jp * p;
      u2[at(k, j)] = -I * a * p;
      u1x[at(k, j)] = I * a * jp * p;
      u1z[at(k, j)] = -jp * jp * p;
      u2x[at(k, j)] = a * a * p;
      u2z[at(k, j)] = -I * a * jp * p;
      T[at(k, j)] = th;
      Tx[at(k, j)] = I * a * th;
      Tz[at(k, j)] = jp * th;
    }
  }
  for (auto* v : {&out.u1, &out.u2, &out.T, &out.u1x, &out.u1z, &out.u2x, &out.u2z, &out.Tx, &out.Tz}) {
    v->resize(np);
  }
  synthesize(u1, Basis::Cos, out.u1);
  synthesize(u2, Basis::Sin, out.u2);
  synthesize(u1x, Basis::Cos, out.u1x);
  synthesize(u1z, Basis::Sin, out.u1z);
  synthesize(u2x, Basis::Sin, out.u2x);
  synthesize(u2z, Basis::Cos, out.u2z);
  synthesize(T, Basis::Sin, out.T);
  synthesize(Tx, Basis::Sin, out.Tx);
  synthesize(Tz, Basis::Cos, out.Tz);
  if (lift != nullptr) {
    for (std::size_t i = 0; i < np; ++i) {
      out.T[i] += lift->T[i];
      out.Tx[i] += lift->Tx[i];
      out.Tz[i] += lift->Tz[i];
    }
  }
}

PhysicalFields Transform::fields(const SpectralState& s) const {
  GradFields gf;
  gradients(s, gf);
  PhysicalFields f;
  f.Nx = grid_.Nx();
  f.Mz = grid_.Mz();
  f.u1 = std::move(gf.u1);
  f.u2 = std::move(gf.u2);
  f.T = std::move(gf.T);
  return f;
}

SpectralState Transform::project(std::span<const double> f1, std::span<const double> f2,
                                 std::span<const double> fT) const {
  const int K = grid_.K();
  const int Nz = grid_.Nz();
  Coeffs p1, p2, pT;
  analyze(f1, Basis::Cos, p1);
  analyze(f2, Basis::Sin, p2);
  analyze(fT, Basis::Sin, pT);
  auto at = [Nz](int k, int j) { return static_cast<std::size_t>(k * (Nz + 1) + j); };
  SpectralState r(K, Nz);
  const cplx I{0.0, 1.0};
  r.mean(0) = p1[at(0, 0)].real();
  for (int j = 1; j <= Nz; ++j) {
    r.mean(j) = 2.0 * p1[at(0, j)].real();
    r.theta(0, j) = 2.0 * pT[at(0, j)].real();
  }
  for (int k = 1; k <= K; ++k) {
    const double a = grid_.alpha(k);
    for (int j = 1; j <= Nz; ++j) {
      const double jp = j * kPi;
      const double q = jp * jp + a * a;
      r.psi(k, j) = (2.0 / q) * (jp * p1[at(k, j)] + I * a * p2[at(k, j)]);
      r.theta(k, j) = 2.0 * pT[at(k, j)];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Free functions

PhysicalFields to_physical(const SpectralState& s, const Grid& g) { return Transform(g).fields(s); }

SpectralState to_spectral(const PhysicalFields& f, const Grid& g, double tol) {
  const Transform tr(g);
  const std::size_t np = tr.points();
  if (f.Nx != g.Nx() || f.Mz != g.Mz() || f.u1.size() != np || f.u2.size() != np || f.T.size() != np) {
    throw RepresentationError("to_spectral: field samples do not match the grid");
  }
  SpectralState s = tr.project(f.u1, f.u2, f.T);
  const PhysicalFields back = tr.fields(s);
  double scale = 0.0, resid = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    scale = std::max({scale, std::abs(f.u1[i]), std::abs(f.u2[i]), std::abs(f.T[i])});
    resid = std::max({resid, std::abs(f.u1[i] - back.u1[i]), std::abs(f.u2[i] - back.u2[i]),
                      std::abs(f.T[i] - back.T[i])});
  }
  if (resid > tol * std::max(scale, 1e-300) && resid > 1e-300) {
    throw RepresentationError("to_spectral: fields are not representable (not divergence-free, "
                              "wall conditions violated or under-resolved); residual " +
                              std::to_string(resid / std::max(scale, 1e-300)));
  }
  return s;
}

double vertical_integral_u1(const SpectralState& s) { return s.mean(0); }

double inner(const SpectralState& a, const SpectralState& b, const Grid& g, double weight) {
  if (!a.same_shape(b) || a.K() != g.K() || a.Nz() != g.Nz()) {
    throw RepresentationError("inner: grid mismatch");
  }
  const int K = g.K();
  const int Nz = g.Nz();
  double vel = a.mean(0) * b.mean(0);
  double tem = 0.0;
  for (int j = 1; j <= Nz; ++j) {
    vel += 0.5 * a.mean(j) * b.mean(j);
    tem += 0.5 * a.theta(0, j).real() * b.theta(0, j).real();
  }
  for (int k = 1; k <= K; ++k) {
    const double al = g.alpha(k);
    for (int j = 1; j <= Nz; ++j) {
      const double jp = j * kPi;
      const double q = jp * jp + al * al;
      vel += q * (a.psi(k, j) * std::conj(b.psi(k, j))).real();
      tem += (a.theta(k, j) * std::conj(b.theta(k, j))).real();
    }
  }
  return g.Lx() * (vel + weight * tem);
}

double norm(const SpectralState& s, const Grid& g, double weight) {
  return std::sqrt(std::max(0.0, inner(s, s, g, weight)));
}

PointValue evaluate(const SpectralState& s, const Grid& g, double x1, double z) {
  PointValue pv{};
  const int K = g.K();
  const int Nz = g.Nz();
  std::vector<double> sj(static_cast<std::size_t>(Nz + 1)), cj(sj.size());
  for (int j = 0; j <= Nz; ++j) {
    sj[static_cast<std::size_t>(j)] = std::sin(j * kPi * z);
    cj[static_cast<std::size_t>(j)] = std::cos(j * kPi * z);
  }
  // mean flow part of the stream function: c0 z + sum c_j sin(j pi z) / (j pi)
  pv.psi = s.mean(0) * z;
  pv.psi_z = s.mean(0);
  for (int j = 1; j <= Nz; ++j) {
    const double jp = j * kPi;
    const auto ju = static_cast<std::size_t>(j);
    pv.psi += s.mean(j) * sj[ju] / jp;
    pv.psi_z += s.mean(j) * cj[ju];
    pv.psi_zz += -jp * s.mean(j) * sj[ju];
    pv.T += s.theta(0, j).real() * sj[ju];
  }
  for (int k = 1; k <= K; ++k) {
    const double a = g.alpha(k);
    const cplx e = std::polar(1.0, a * x1);
    for (int j = 1; j <= Nz; ++j) {
      const double jp = j * kPi;
      const auto ju = static_cast<std::size_t>(j);
      const cplx pe = s.psi(k, j) * e;
      const double re = 2.0 * pe.real();
      const double im = 2.0 * pe.imag();  // Re(i pe) = -Im(pe)
      pv.psi += re * sj[ju];
      pv.psi_x += -a * im * sj[ju];
      pv.psi_xx += -a * a * re * sj[ju];
      pv.psi_z += re * jp * cj[ju];
      pv.psi_xz += -a * im * jp * cj[ju];
      pv.psi_zz += -jp * jp * re * sj[ju];
      pv.T += 2.0 * (s.theta(k, j) * e).real() * sj[ju];
    }
  }
  return pv;
}

SpectralState shift(const SpectralState& s, const Grid& g, double dx) {
  SpectralState r = s;
  for (int k = 1; k <= g.K(); ++k) {
    const cplx ph = std::polar(1.0, -g.alpha(k) * dx);
    for (int j = 1; j <= g.Nz(); ++j) {
      r.psi(k, j) *= ph;
      r.theta(k, j) *= ph;
    }
  }
  return r;
}

SpectralState random_state(const Grid& g, std::mt19937_64& rng, double amp, int kmax) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SpectralState s(g);
  const int kk = std::min(kmax, g.K());
  for (int j = 0; j <= g.Nz(); ++j) {
    const double decay = amp / std::max(1, j * j);
    s.mean(j) = decay * U(rng);
  }
  for (int j = 1; j <= g.Nz(); ++j) s.theta(0, j) = amp / (j * j) * U(rng);
  for (int k = 1; k <= kk; ++k)
    for (int j = 1; j <= g.Nz(); ++j) {
      const double decay = amp / (j * j);
      const double re = U(rng), im = U(rng);
      s.psi(k, j) = decay * cplx{re, im};
      const double tr = U(rng), ti = U(rng);
      s.theta(k, j) = decay * cplx{tr, ti};
    }
  return s;
}

}  // namespace walker
