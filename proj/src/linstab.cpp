#include "walker/linstab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "walker/error.hpp"

namespace walker::linstab {

namespace {

void require_matching(const NondimParams& p, const Grid& g) {
  if (std::abs(p.r0 - g.r0()) > 1e-14 * std::max(1.0, p.r0)) {
    throw ParameterError("linstab: parameter r0 and grid r0 differ");
  }
}

// d/ds of the closed form with s = alpha^2, up to a positive factor 1/s^2.
double marginal_stationarity(double s, double A, double dP0, double dP1) {
  const double P = s * s + (2.0 * A + dP1) * s + A * A + dP0 * A;
  const double dP = 2.0 * s + 2.0 * A + dP1;
  return s * (A + s) * dP - A * P;
}

}  // namespace

double marginal_rayleigh(double alpha, int j, double dP0, double dP1) {
  if (!(alpha != 0.0)) throw ParameterError("marginal_rayleigh: alpha = 0 is singular");
  if (j < 1) throw ParameterError("marginal_rayleigh: vertical mode must be >= 1");
  const double jp2 = (j * kPi) * (j * kPi);
  const double a2 = alpha * alpha;
  const double a02 = a2 + dP0;
  const double a12 = a2 + dP1;
  return (jp2 + a2) * (jp2 * jp2 + (a2 + a02) * jp2 + a2 * a12) / a2;
}

double marginal_rayleigh(ModeIndex m, const NondimParams& p) {
  if (m.k < 1) throw ParameterError("marginal_rayleigh: k = 0 is singular (division by alpha^2)");
  return marginal_rayleigh(m.k / p.r0, m.j, p.deltaP0(), p.deltaP1());
}

ContinuousMinimum minimize_marginal(int j, double dP0, double dP1) {
  const double A = (j * kPi) * (j * kPi);
  double lo = 1e-12 * A, hi = 10.0 * A + 10.0;
  while (marginal_stationarity(hi, A, dP0, dP1) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (marginal_stationarity(mid, A, dP0, dP1) < 0.0 ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  ContinuousMinimum out;
  out.alpha = std::sqrt(s);
  out.R = marginal_rayleigh(out.alpha, j, dP0, dP1);
  return out;
}

CriticalPoint0 critical_rayleigh(const NondimParams& p, int kmax) {
  validate(p);
  if (kmax < 1) throw ParameterError("critical_rayleigh: kmax must be >= 1");
  CriticalPoint0 c;
  c.Rc = std::numeric_limits<double>::infinity();
  std::vector<double> Rk(static_cast<std::size_t>(kmax + 1));
  for (int k = 1; k <= kmax; ++k) {
    Rk[static_cast<std::size_t>(k)] = marginal_rayleigh({k, 1}, p);
    if (Rk[static_cast<std::size_t>(k)] < c.Rc) {
      c.Rc = Rk[static_cast<std::size_t>(k)];
      c.kc = k;
    }
  }
  if (c.kc == kmax && kmax > 1) {
    throw NumericError("critical_rayleigh: minimum attained at kmax = " + std::to_string(kmax) +
                       "; enlarge the wavenumber window");
  }
  for (int k = 1; k <= kmax; ++k) {
    if (k == c.kc) continue;
    if (std::abs(Rk[static_cast<std::size_t>(k)] - c.Rc) <= 1e-12 * c.Rc) {
      c.degenerate = true;
      c.multiplicity = 4;
      c.k_tie = k;
      break;
    }
  }
  return c;
}

Eigen::MatrixXcd LinearBlock::op() const { return M.partialPivLu().solve(K); }

LinearBlock assemble_linear_block(const NondimParams& p, double R, int k, const Grid& g,
                                  double weight) {
  require_matching(p, g);
  if (k < 0 || k > g.K()) throw RepresentationError("assemble_linear_block: k outside the grid");
  const int Nz = g.Nz();
  const int Mz = g.Mz();
  std::vector<double> z, w;
  gauss_legendre01(Mz, z, w);
  const double a = g.alpha(k);
  const double dP0 = p.deltaP0();
  const double dP1 = p.deltaP1();
  const double Pr = p.Pr;
  const double om = p.omega;
  const cplx I{0.0, 1.0};

  // Trial functions: vertical profiles of (u1, u2, T) multiplying e^{i a x1},
  // together with second z-derivatives for the Laplacian.
  struct Trial {
    std::vector<cplx> u1, u2, T, u1zz, u2zz, Tzz;
  };
  std::vector<Trial> basis;
  const int nvel = (k == 0) ? Nz + 1 : Nz;
  const int j0 = (k == 0) ? 0 : 1;
  auto fill = [&](auto&& f) {
    Trial t;
    for (auto* v : {&t.u1, &t.u2, &t.T, &t.u1zz, &t.u2zz, &t.Tzz}) v->assign(static_cast<std::size_t>(Mz), 0.0);
    for (int m = 0; m < Mz; ++m) f(t, static_cast<std::size_t>(m), z[static_cast<std::size_t>(m)]);
    basis.push_back(std::move(t));
  };
  for (int j = j0; j < j0 + nvel; ++j) {
    const double jp = j * kPi;
    if (k == 0) {
      fill([&](Trial& t, std::size_t m, double zz) {
        t.u1[m] = std::cos(jp * zz);
        t.u1zz[m] = -jp * jp * std::cos(jp * zz);
      });
    } else {
      fill([&](Trial& t, std::size_t m, double zz) {
        t.u1[m] = jp * std::cos(jp * zz);
        t.u1zz[m] = -jp * jp * jp * std::cos(jp * zz);
        t.u2[m] = -I * a * std::sin(jp * zz);
        t.u2zz[m] = I * a * jp * jp * std::sin(jp * zz);
      });
    }
  }
  for (int j = 1; j <= Nz; ++j) {
    const double jp = j * kPi;
    fill([&](Trial& t, std::size_t m, double zz) {
      t.T[m] = std::sin(jp * zz);
      t.Tzz[m] = -jp * jp * std::sin(jp * zz);
    });
  }
  const auto n = static_cast<Eigen::Index>(basis.size());
  LinearBlock blk;
  blk.k = k;
  blk.K = Eigen::MatrixXcd::Zero(n, n);
  blk.M = Eigen::MatrixXcd::Zero(n, n);
  blk.W = Eigen::MatrixXcd::Zero(n, n);
  const auto nv = static_cast<Eigen::Index>(nvel);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Trial& t = basis[static_cast<std::size_t>(c)];
    // Primitive right-hand sides; x-derivatives are multiplication by i a.
    std::vector<cplx> F1(static_cast<std::size_t>(Mz)), F2(F1.size()), FT(F1.size());
    for (std::size_t m = 0; m < F1.size(); ++m) {
      const cplx lap1 = t.u1zz[m] - a * a * t.u1[m];
      const cplx lap2 = t.u2zz[m] - a * a * t.u2[m];
      const cplx lapT = t.Tzz[m] - a * a * t.T[m];
      F1[m] = lap1 + (2.0 / p.r0) * I * a * t.u2[m] - dP0 * t.u1[m] - (om / Pr) * t.u2[m];
      F2[m] = lap2 - (2.0 / p.r0) * I * a * t.u1[m] - dP1 * t.u2[m] + (om / Pr) * t.u1[m] + R * t.T[m];
      FT[m] = lapT + t.u2[m];
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const Trial& v = basis[static_cast<std::size_t>(r)];
      cplx kin{}, mass_v{}, mass_T{}, kT{};
      for (std::size_t m = 0; m < F1.size(); ++m) {
        const double wm = w[m];
        kin += wm * (F1[m] * std::conj(v.u1[m]) + F2[m] * std::conj(v.u2[m]));
        kT += wm * FT[m] * std::conj(v.T[m]);
        mass_v += wm * (t.u1[m] * std::conj(v.u1[m]) + t.u2[m] * std::conj(v.u2[m]));
        mass_T += wm * t.T[m] * std::conj(v.T[m]);
      }
      if (r < nv) {
        blk.K(r, c) = kin;
        blk.M(r, c) = mass_v / Pr;
      } else {
        blk.K(r, c) = kT;
        blk.M(r, c) = mass_T;
      }
      blk.W(r, c) = mass_v + weight * mass_T;
    }
  }
  return blk;
}

Eigen::VectorXcd block_eigenvalues(const NondimParams& p, double R, int k, const Grid& g) {
  const LinearBlock b = assemble_linear_block(p, R, k, g);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b.op(), false);
  if (es.info() != Eigen::Success) {
    throw NumericError("block_eigenvalues: eigen iteration failed for k = " + std::to_string(k) +
                       " at R = " + std::to_string(R));
  }
  Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<cplx> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = v[static_cast<std::size_t>(i)];
  return ev;
}

SpectralState normalized_mode(const Eigen::VectorXcd& v, int k, const Grid& g, double weight) {
  const int Nz = g.Nz();
  SpectralState s(g);
  if (k == 0) {
    for (int j = 0; j <= Nz; ++j) s.mean(j) = v[j].real();
    for (int j = 1; j <= Nz; ++j) s.theta(0, j) = v[Nz + j].real();
  } else {
    // phase: theta(k, 1) real positive; otherwise the largest coefficient
    cplx pivot = v[Nz];
    double vmax = 0.0;
    Eigen::Index imax = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > vmax) {
        vmax = std::abs(v[i]);
        imax = i;
      }
    }
    if (std::abs(pivot) < 1e-10 * vmax) pivot = v[imax];
    const cplx phase = std::conj(pivot) / std::abs(pivot);
    for (int j = 1; j <= Nz; ++j) {
      s.psi(k, j) = phase * v[j - 1];
      s.theta(k, j) = phase * v[Nz + j - 1];
    }
  }
  double nrm = norm(s, g, weight);
  if (k == 0) {
    // real sign convention for the mean block: largest entry positive
    double big = 0.0;
    for (int j = 0; j <= Nz; ++j)
      if (std::abs(s.mean(j)) > std::abs(big)) big = s.mean(j);
    for (int j = 1; j <= Nz; ++j)
      if (std::abs(s.theta(0, j).real()) > std::abs(big)) big = s.theta(0, j).real();
    if (big < 0.0) nrm = -nrm;
  }
  if (nrm == 0.0) throw NumericError("normalized_mode: zero eigenvector");
  s *= 1.0 / nrm;
  return s;
}

namespace {

// Bracketed root of a sign-changing f on [lo, hi], relative tolerance rtol.
template <class F>
double find_root(F&& f, double lo, double hi, double rtol) {
  boost::uintmax_t iters = 200;
  auto tol = [rtol](double a, double b) { return std::abs(b - a) <= rtol * std::max(std::abs(a), std::abs(b)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

double norm_weight(const NondimParams& p, double R) { return R > 0.0 ? default_weight(p.Pr, R) : p.Pr; }

}  // namespace

std::vector<EigenPair> eigen_spectrum(const NondimParams& p, double R, int nev, const Grid& g) {
  require_matching(p, g);
  if (nev < 1) throw ParameterError("eigen_spectrum: nev must be >= 1");
  const double weight = norm_weight(p, R);
  std::vector<EigenPair> all;
  for (int k = 0; k <= g.K(); ++k) {
    const LinearBlock b = assemble_linear_block(p, R, k, g);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b.op(), true);
    if (es.info() != Eigen::Success) {
      throw NumericError("eigen_spectrum: eigen iteration failed for k = " + std::to_string(k) +
                         " at R = " + std::to_string(R));
    }
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      EigenPair e;
      e.beta = es.eigenvalues()[i];
      e.R = R;
      e.k = k;
      e.state = normalized_mode(es.eigenvectors().col(i), k, g, weight);
      if (k == 0) {
        all.push_back(std::move(e));
      } else {
        EigenPair e2 = e;
        // quarter-wavelength shift: coefficients times -i
        e2.state = shift(e.state, g, 0.5 * kPi * g.r0() / k);
        all.push_back(std::move(e));
        all.push_back(std::move(e2));
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const EigenPair& x, const EigenPair& y) {
    return x.beta.real() > y.beta.real();
  });
  if (static_cast<int>(all.size()) > nev) all.resize(static_cast<std::size_t>(nev));
  return all;
}

double leading_growth_rate(const NondimParams& p, double R, const Grid& g) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= g.K(); ++k) best = std::max(best, block_eigenvalues(p, R, k, g)[0].real());
  return best;
}

CriticalPoint0 numeric_critical_rayleigh(const NondimParams& p, const Grid& g, int kmax) {
  require_matching(p, g);
  if (kmax > g.K()) throw ParameterError("numeric_critical_rayleigh: kmax exceeds grid truncation");
  CriticalPoint0 c;
  c.Rc = std::numeric_limits<double>::infinity();
  std::vector<double> Rk;
  for (int k = 1; k <= kmax; ++k) {
    // M^{-1} K is affine in R
    const Eigen::MatrixXcd op0 = assemble_linear_block(p, 0.0, k, g, 1.0).op();
    const Eigen::MatrixXcd op1 = assemble_linear_block(p, 1.0, k, g, 1.0).op() - op0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op0, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i].real() >= 0.0) throw NumericError("numeric_critical_rayleigh: unstable at R = 0");
    // (op0 + R op1) x = 0  <=>  op0^{-1} op1 x = -x / R
    es.compute(op0.partialPivLu().solve(op1), false);
    if (es.info() != Eigen::Success) throw NumericError("numeric_critical_rayleigh: eigen iteration failed");
    double Rroot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const cplx mu = es.eigenvalues()[i];
      if (mu.real() < 0.0 && std::abs(mu.imag()) <= 1e-8 * std::abs(mu)) Rroot = std::min(Rroot, -1.0 / mu.real());
    }
    if (!std::isfinite(Rroot)) throw NumericError("numeric_critical_rayleigh: no neutral Rayleigh number for k = " + std::to_string(k));
    Rk.push_back(Rroot);
    if (Rroot < c.Rc) {
      c.Rc = Rroot;
      c.kc = k;
    }
  }
  if (c.kc == kmax && kmax > 1) {
    throw NumericError("numeric_critical_rayleigh: minimum attained at kmax; enlarge the window");
  }
  for (int k = 1; k <= kmax; ++k) {
    if (k != c.kc && std::abs(Rk[static_cast<std::size_t>(k - 1)] - c.Rc) <= 1e-12 * c.Rc) {
      c.degenerate = true;
      c.multiplicity = 4;
      c.k_tie = k;
      break;
    }
  }
  return c;
}

PesReport verify_pes(const NondimParams& p, double Rlo, double Rhi, const Grid& g,
                     double crossing_tol) {
  require_matching(p, g);
  if (!(Rlo < Rhi)) throw ParameterError("verify_pes: need Rlo < Rhi");
  auto lead = [&](double R) { return leading_growth_rate(p, R, g); };
  double lo = Rlo, hi = Rhi;
  const double flo = lead(lo), fhi = lead(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw NumericError("verify_pes: leading eigenvalue does not cross zero in [" + std::to_string(Rlo) +
                       ", " + std::to_string(Rhi) + "]");
  }
  PesReport rep;
  rep.R_cross = find_root(lead, lo, hi, 1e-15);
  rep.Rc_closed = critical_rayleigh(p, g.K()).Rc;
  rep.rel_error = std::abs(rep.R_cross - rep.Rc_closed) / rep.Rc_closed;
  const auto spec = eigen_spectrum(p, rep.R_cross, 16, g);
  for (const auto& e : spec) {
    if (std::abs(e.beta) < crossing_tol) {
      ++rep.crossing_count;
    } else {
      rep.next_eigenvalue = e.beta.real();
      break;
    }
  }
  const double h = 1e-4 * rep.R_cross;
  rep.slope = (lead(rep.R_cross + h) - lead(rep.R_cross - h)) / (2.0 * h);
  rep.ok = rep.crossing_count >= 1 && rep.next_eigenvalue < 0.0 && rep.slope > 0.0;
  return rep;
}

CriticalPair critical_pair(const NondimParams& p, const Grid& g, int kmax) {
  CriticalPair cp;
  cp.crit = critical_rayleigh(p, kmax);
  if (cp.crit.kc > g.K()) throw RepresentationError("critical_pair: grid does not resolve kc");
  const double Rc = cp.crit.Rc;
  cp.weight = default_weight(p.Pr, Rc);
  const LinearBlock b = assemble_linear_block(p, Rc, cp.crit.kc, g);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b.op(), true);
  if (es.info() != Eigen::Success) throw NumericError("critical_pair: eigen iteration failed");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  cp.psi1.beta = es.eigenvalues()[best];
  cp.psi1.R = Rc;
  cp.psi1.k = cp.crit.kc;
  cp.psi1.state = normalized_mode(es.eigenvectors().col(best), cp.crit.kc, g, cp.weight);
  cp.psi1_tilde = cp.psi1;
  cp.psi1_tilde.state = shift(cp.psi1.state, g, 0.5 * kPi * g.r0() / cp.crit.kc);
  return cp;
}

}  // namespace walker::linstab
