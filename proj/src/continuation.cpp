#include "walker/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "walker/error.hpp"

namespace walker::continuation {

Eigen::MatrixXd SteadyProblem::jacobian(const Eigen::VectorXd& x, double lambda) const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    J.col(i) = (residual(xp, lambda) - residual(xm, lambda)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
  }
  return J;
}

Eigen::VectorXd SteadyProblem::dlambda(const Eigen::VectorXd& x, double lambda) const {
  const double h = 1e-6 * std::max(1.0, std::abs(lambda));
  return (residual(x, lambda + h) - residual(x, lambda - h)) / (2.0 * h);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ScalarFold::residual(const Eigen::VectorXd& x, double lambda) const {
  const double u = x[0];
  return Eigen::VectorXd::Constant(1, lambda * u + b_ * u * u - u * u * u);
}

Eigen::MatrixXd ScalarFold::jacobian(const Eigen::VectorXd& x, double lambda) const {
  const double u = x[0];
  return Eigen::MatrixXd::Constant(1, 1, lambda + 2.0 * b_ * u - 3.0 * u * u);
}

Eigen::VectorXd ScalarFold::dlambda(const Eigen::VectorXd& x, double) const { return x; }

Eigen::VectorXd HopfNormalForm::residual(const Eigen::VectorXd& x, double mu) const {
  const double r2 = x.squaredNorm();
  Eigen::VectorXd f(2);
  f[0] = mu * x[0] - rho0_ * x[1] - r2 * x[0];
  f[1] = rho0_ * x[0] + mu * x[1] - r2 * x[1];
  return f;
}

Eigen::MatrixXd HopfNormalForm::jacobian(const Eigen::VectorXd& x, double mu) const {
  const double a = x[0], b = x[1], r2 = a * a + b * b;
  Eigen::MatrixXd J(2, 2);
  J << mu - r2 - 2 * a * a, -rho0_ - 2 * a * b, rho0_ - 2 * a * b, mu - r2 - 2 * b * b;
  return J;
}

// ---------------------------------------------------------------------------

namespace {

SpectralState ddx(const SpectralState& s, const Grid& g) {
  SpectralState r(g);
  const cplx I{0.0, 1.0};
  for (int k = 1; k <= g.K(); ++k)
    for (int j = 1; j <= g.Nz(); ++j) {
      r.psi(k, j) = I * g.alpha(k) * s.psi(k, j);
      r.theta(k, j) = I * g.alpha(k) * s.theta(k, j);
    }
  return r;
}

}  // namespace

ChannelProblem::ChannelProblem(const NondimParams& p, const Grid& g, const ForcingProfile& f)
    : p_(p), g_(g), f_(f), model_(std::make_unique<dynamics::Model>(p, g, f)), w_(model_->weight()) {}

void ChannelProblem::set_phase_reference(const SpectralState& ref) {
  if (!ref.same_shape(SpectralState(g_))) throw RepresentationError("phase reference has the wrong shape");
  ref_ = ref;
  dref_ = ddx(ref, g_).pack();
  if (dref_.norm() == 0.0) throw NumericError("phase reference is translation invariant");
  dref_ /= dref_.norm();
  phase_ = true;
}

int ChannelProblem::dim() const {
  return static_cast<int>(SpectralState(g_).real_size()) + (phase_ ? 1 : 0);
}

dynamics::Model& ChannelProblem::model_at(double R) const {
  if (model_->params().R != R) model_->set_R(R);
  return *model_;
}

SpectralState ChannelProblem::state(const Eigen::VectorXd& x) const {
  const auto n = static_cast<Eigen::Index>(SpectralState(g_).real_size());
  return SpectralState::from_vector(g_.K(), g_.Nz(), x.head(n));
}

Eigen::VectorXd ChannelProblem::vec(const SpectralState& s) const {
  Eigen::VectorXd v = s.pack();
  if (!phase_) return v;
  Eigen::VectorXd x(v.size() + 1);
  x << v, 0.0;
  return x;
}

Eigen::VectorXd ChannelProblem::residual(const Eigen::VectorXd& x, double R) const {
  const SpectralState y = state(x);
  SpectralState F = model_at(R).tendency(y);
  if (!phase_) return F.pack();
  const Eigen::Index n = x.size() - 1;
  F.axpy(x[n], ddx(y, g_));
  Eigen::VectorXd r(x.size());
  r << F.pack(), dref_.dot(x.head(n) - ref_.pack());
  return r;
}

Eigen::MatrixXd ChannelProblem::tendency_jacobian(const SpectralState& y, double R) const {
  return model_at(R).jacobian(y);
}

Eigen::MatrixXd ChannelProblem::jacobian(const Eigen::VectorXd& x, double R) const {
  const SpectralState y = state(x);
  Eigen::MatrixXd Jy = model_at(R).jacobian(y);
  if (!phase_) return Jy;
  const Eigen::Index n = x.size() - 1;
  const double c = x[n];
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
  J.topLeftCorner(n, n) = Jy;
  if (c != 0.0) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    SpectralState v(g_);
    for (Eigen::Index i = 0; i < n; ++i) {
      e[i] = 1.0;
      v.unpack(e);
      e[i] = 0.0;
      J.col(i).head(n) += c * ddx(v, g_).pack();
    }
  }
  J.col(n).head(n) = ddx(y, g_).pack();
  J.row(n).head(n) = dref_.transpose();
  return J;
}

Eigen::VectorXd ChannelProblem::dlambda(const Eigen::VectorXd& x, double R) const {
  // the tendency is affine in R
  Eigen::VectorXd d = residual(x, R + 1.0) - residual(x, R);
  model_at(R);
  return d;
}

Eigen::MatrixXd ChannelProblem::stability_matrix(const Eigen::VectorXd& x, double R) const {
  return model_at(R).jacobian(state(x));
}

double ChannelProblem::amplitude(const Eigen::VectorXd& x) const { return walker::norm(state(x), g_, w_); }

double ChannelProblem::residual_norm(const Eigen::VectorXd& r) const {
  double v = walker::norm(state(r), g_, w_);
  if (phase_) v = std::hypot(v, r[r.size() - 1]);
  return v;
}

// ---------------------------------------------------------------------------

NewtonReport newton(const SteadyProblem& prob, Eigen::VectorXd x, double lambda, double tol, int max_iter) {
  NewtonReport rep;
  Eigen::VectorXd r = prob.residual(x, lambda);
  double res = prob.residual_norm(r);
  rep.history.push_back(res);
  for (int it = 0; it < max_iter && !(res < tol); ++it) {
    const Eigen::MatrixXd J = prob.jacobian(x, lambda);
    const Eigen::VectorXd dx = J.partialPivLu().solve(-r);
    if (!dx.allFinite()) break;
    double t = 1.0;
    Eigen::VectorXd xn, rn;
    double resn = 0.0;
    for (int h = 0; h < 20; ++h, t *= 0.5) {
      xn = x + t * dx;
      rn = prob.residual(xn, lambda);
      resn = prob.residual_norm(rn);
      if (resn < res) break;
    }
    const bool stalled = !(resn < res);
    x = xn;
    r = rn;
    res = resn;
    rep.history.push_back(res);
    rep.iterations = it + 1;
    if (stalled) break;
  }
  rep.x = x;
  rep.residual = res;
  if (!(res < tol)) {
    std::ostringstream os;
    os << "Newton did not converge at lambda = " << std::setprecision(10) << lambda << "; residual history:";
    for (double h : rep.history) os << ' ' << std::setprecision(3) << h;
    throw ConvergenceError(os.str());
  }
  return rep;
}

BasicState basic_state(const NondimParams& p, const Grid& g, const ForcingProfile& f, double tol,
                       const SpectralState* guess) {
  ChannelProblem prob(p, g, f);
  BasicState bs;
  bs.R = p.R;
  const Eigen::VectorXd x0 = guess ? guess->pack() : Eigen::VectorXd::Zero(prob.dim());
  NewtonReport nr;
  try {
    nr = newton(prob, x0, p.R, tol);
  } catch (const ConvergenceError& e) {
    if (!(p.R > 0.0)) throw;
    double R = 0.5 * p.R;
    Eigen::VectorXd x = newton(prob, Eigen::VectorXd::Zero(prob.dim()), R, tol).x;
    double dR = 0.125 * (p.R - R);
    int marches = 0;
    while (R < p.R) {
      const double Rn = std::min(p.R, R + dR);
      try {
        nr = newton(prob, x, Rn, tol);
        x = nr.x;
        R = Rn;
        dR *= 1.5;
        ++marches;
      } catch (const ConvergenceError&) {
        dR *= 0.5;
        if (dR < 1e-8 * p.R) throw ConvergenceError(std::string(e.what()) + "; march in R stalled");
      }
    }
    std::ostringstream os;
    os << "basic state reached by " << marches << " steps in R from R / 2";
    bs.warnings.push_back(os.str());
  }
  bs.state = prob.state(nr.x);
  bs.residual = nr.residual;
  bs.iterations = nr.iterations;
  bs.epsilon = walker::norm(bs.state, g, prob.weight());
  if (bs.epsilon > 0.1) {
    std::ostringstream os;
    os << "basic state magnitude " << bs.epsilon << " exceeds 0.1; perturbative statements may not apply";
    bs.warnings.push_back(os.str());
  }
  return bs;
}

namespace {

struct EigenResult {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  std::vector<Eigen::Index> order;  // by real part descending
};

EigenResult real_eigen(const Eigen::MatrixXd& A, bool vectors) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, vectors);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue solver failed");
  EigenResult r;
  r.values = es.eigenvalues();
  if (vectors) r.vectors = es.eigenvectors();
  r.order.resize(static_cast<std::size_t>(r.values.size()));
  std::iota(r.order.begin(), r.order.end(), Eigen::Index{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (r.values[a].real() != r.values[b].real()) return r.values[a].real() > r.values[b].real();
    return r.values[a].imag() > r.values[b].imag();
  });
  return r;
}

}  // namespace

Spectrum perturbed_spectrum(const NondimParams& p, const Grid& g, const ForcingProfile& f, const BasicState& bs,
                            int nev) {
  const dynamics::Model m(p, g, f);
  const EigenResult er = real_eigen(m.jacobian(bs.state), true);
  Spectrum sp;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(nev, 0)), er.order.size());
  const auto nr = static_cast<Eigen::Index>(bs.state.real_size());
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index c = er.order[i];
    sp.eigenvalues.push_back(er.values[c]);
    // real part of the complex eigenvector, phase chosen to maximize it
    Eigen::VectorXcd v = er.vectors.col(c);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v[imax]) / std::abs(v[imax]);
    Eigen::VectorXd re = v.real().head(nr);
    const double nn = re.norm();
    if (nn > 0.0) re /= nn;
    sp.modes.push_back(SpectralState::from_vector(g.K(), g.Nz(), re));
  }
  return sp;
}

PerturbedCritical perturbed_critical(const NondimParams& p, const Grid& g, const ForcingProfile& f,
                                     const BasicState& bs, double lo, double hi, int n, double rtol) {
  if (!(hi > lo) || !(lo > 0.0) || n < 2) throw ParameterError("perturbed_critical: need 0 < lo < hi, n >= 2");
  dynamics::Model m(p, g, f);
  auto lead = [&](double R) {
    m.set_R(R);
    return real_eigen(m.jacobian(bs.state), false);
  };
  auto top = [](const EigenResult& er) { return er.values[er.order.front()].real(); };
  double a = lo;
  if (top(lead(a)) > 0.0)
    throw NumericError("perturbed_critical: leading eigenvalue already positive at the lower bound");
  for (int i = 1; i < n; ++i) {
    double b = lo + (hi - lo) * i / (n - 1);
    if (top(lead(b)) > 0.0) {
      std::uintmax_t iters = 100;
      const auto tol = [rtol](double x, double y) { return std::abs(y - x) <= rtol * std::abs(x); };
      const auto root = boost::math::tools::toms748_solve([&](double R) { return top(lead(R)); }, a, b, tol, iters);
      PerturbedCritical pc;
      pc.R = 0.5 * (root.first + root.second);
      pc.basic = bs;
      const EigenResult er = lead(pc.R);
      for (std::size_t k = 0; k < std::min<std::size_t>(6, er.order.size()); ++k)
        pc.leading.push_back(er.values[er.order[k]]);
      pc.splitting = std::abs(pc.leading[0] - pc.leading[1]);
      return pc;
    }
    a = b;
  }
  throw NumericError("perturbed_critical: no crossing in the window");
}

// ---------------------------------------------------------------------------

namespace {

struct Corrected {
  bool ok = false;
  Eigen::VectorXd x;
  double lambda = 0.0;
  int iterations = 0;
};

// Newton on [F(x, l); t.(z - zp)] = 0.
Corrected correct(const SteadyProblem& prob, const Eigen::VectorXd& xp, double lp, const Eigen::VectorXd& t,
                  const ContinuationOptions& opt) {
  const Eigen::Index n = xp.size();
  Corrected c;
  c.x = xp;
  c.lambda = lp;
  for (int it = 0; it <= opt.max_corrector; ++it) {
    const Eigen::VectorXd F = prob.residual(c.x, c.lambda);
    const double arc = t.head(n).dot(c.x - xp) + t[n] * (c.lambda - lp);
    const double res = prob.residual_norm(F);
    if (!std::isfinite(res)) return c;
    if (res < opt.tol && std::abs(arc) < 1e-10 * std::max(1.0, std::abs(c.lambda))) {
      c.ok = true;
      c.iterations = it;
      return c;
    }
    if (it == opt.max_corrector) break;
    Eigen::MatrixXd A(n + 1, n + 1);
    A.topLeftCorner(n, n) = prob.jacobian(c.x, c.lambda);
    A.col(n).head(n) = prob.dlambda(c.x, c.lambda);
    A.row(n) = t.transpose();
    Eigen::VectorXd rhs(n + 1);
    rhs << -F, -arc;
    const Eigen::VectorXd d = A.partialPivLu().solve(rhs);
    if (!d.allFinite()) return c;
    c.x += d.head(n);
    c.lambda += d[n];
  }
  return c;
}

Eigen::VectorXd tangent(const SteadyProblem& prob, const Eigen::VectorXd& x, double lambda,
                        const Eigen::VectorXd& t_prev) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd A(n + 1, n + 1);
  A.topLeftCorner(n, n) = prob.jacobian(x, lambda);
  A.col(n).head(n) = prob.dlambda(x, lambda);
  A.row(n) = t_prev.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::VectorXd t = A.fullPivLu().solve(rhs);
  if (!t.allFinite() || t.norm() == 0.0) throw NumericError("continuation: tangent solve failed");
  return t / t.norm();
}

void stability(const SteadyProblem& prob, BranchPoint& pt, const ContinuationOptions& opt) {
  const EigenResult er = real_eigen(prob.stability_matrix(pt.x, pt.lambda), false);
  pt.index = 0;
  for (Eigen::Index i = 0; i < er.values.size(); ++i)
    if (er.values[i].real() > opt.index_tol) ++pt.index;
  pt.leading.clear();
  for (std::size_t i = 0; i < er.order.size() && static_cast<int>(i) < opt.n_leading; ++i)
    pt.leading.push_back(er.values[er.order[i]]);
}

double min_real_eigen(const SteadyProblem& prob, const Eigen::VectorXd& x, double lambda) {
  const EigenResult er = real_eigen(prob.stability_matrix(x, lambda), false);
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const cplx v = er.values[i];
    if (std::abs(v.imag()) <= 1e-8 * std::max(1.0, std::abs(v))) m = std::min(m, std::abs(v.real()));
  }
  return m;
}

}  // namespace

Branch continue_branch(const SteadyProblem& prob, const Eigen::VectorXd& x0, double lambda_start,
                       double lambda_end, const ContinuationOptions& opt) {
  if (!(opt.ds > 0.0) || !(opt.ds_min > 0.0) || opt.ds_min > opt.ds)
    throw ParameterError("continuation: need 0 < ds_min <= ds");
  if (lambda_end == lambda_start) throw ParameterError("continuation: empty parameter interval");
  const double lo = std::min(lambda_start, lambda_end), hi = std::max(lambda_start, lambda_end);
  const Eigen::Index n = x0.size();

  Branch br;
  BranchPoint pt;
  pt.x = newton(prob, x0, lambda_start, opt.tol, 50).x;
  pt.lambda = lambda_start;
  Eigen::VectorXd t0 = Eigen::VectorXd::Zero(n + 1);
  t0[n] = lambda_end > lambda_start ? 1.0 : -1.0;
  Eigen::VectorXd t = tangent(prob, pt.x, pt.lambda, t0);
  pt.dlambda_ds = t[n];
  pt.amplitude = prob.amplitude(pt.x);
  stability(prob, pt, opt);
  br.points.push_back(pt);

  double ds = opt.ds;
  for (int step = 0; step < opt.max_steps; ++step) {
    const BranchPoint& prev = br.points.back();
    Corrected c;
    for (;;) {
      c = correct(prob, prev.x + ds * t.head(n), prev.lambda + ds * t[n], t, opt);
      if (c.ok) break;
      ds *= 0.5;
      if (ds < opt.ds_min) {
        std::ostringstream os;
        os << "continuation stalled at lambda = " << std::setprecision(10) << prev.lambda << " (ds below "
           << opt.ds_min << ")";
        throw ConvergenceError(os.str());
      }
    }
    BranchPoint np;
    np.x = c.x;
    np.lambda = c.lambda;
    np.s = prev.s + ds;
    const Eigen::VectorXd tn = tangent(prob, np.x, np.lambda, t);
    np.dlambda_ds = tn[n];
    np.amplitude = prob.amplitude(np.x);
    stability(prob, np, opt);

    if ((t[n] > 0.0) != (tn[n] > 0.0) && t[n] != 0.0) {
      // bisection on the step length from prev for dlambda/ds = 0
      double a = 0.0, b = ds;
      Eigen::VectorXd fx = np.x, ft = tn;
      double fl = np.lambda;
      const bool sign_prev = t[n] > 0.0;
      for (int it = 0; it < 60 && b - a > 1e-15 * std::max(1.0, ds); ++it) {
        const double h = 0.5 * (a + b);
        const Corrected cm = correct(prob, prev.x + h * t.head(n), prev.lambda + h * t[n], t, opt);
        if (!cm.ok) break;
        const Eigen::VectorXd tm = tangent(prob, cm.x, cm.lambda, t);
        fx = cm.x;
        fl = cm.lambda;
        ft = tm;
        if ((tm[n] > 0.0) == sign_prev)
          a = h;
        else
          b = h;
      }
      FoldPoint fp;
      fp.x = fx;
      fp.lambda = fl;
      fp.tangent = ft;
      fp.min_real_eig = min_real_eigen(prob, fx, fl);
      fp.index_before = prev.index;
      fp.index_after = np.index;
      br.folds.push_back(fp);
    }

    t = tn;
    br.points.push_back(np);
    if (np.lambda < lo || np.lambda > hi) break;
    if (c.iterations <= 3) ds = std::min(opt.ds_max, 1.5 * ds);
    if (step + 1 == opt.max_steps) br.notes.push_back("step budget exhausted before leaving the interval");
  }
  return br;
}

// ---------------------------------------------------------------------------

namespace {

// Largest real part over eigenvalues with |Im| > floor; -inf when none.
double complex_lead(const SteadyProblem& prob, const Eigen::VectorXd& x, double lambda, double im_floor,
                    cplx* pair) {
  const EigenResult er = real_eigen(prob.stability_matrix(x, lambda), false);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i : er.order) {
    const cplx v = er.values[i];
    if (std::abs(v.imag()) > im_floor && v.real() > best) {
      best = v.real();
      if (pair) *pair = cplx(v.real(), std::abs(v.imag()));
    }
  }
  return best;
}

}  // namespace

std::optional<HopfPoint> detect_hopf(const SteadyProblem& prob, const Eigen::VectorXd& x0, double lo, double hi,
                                     int n, double im_floor, double tol) {
  if (!(hi > lo) || n < 2) throw ParameterError("detect_hopf: need lo < hi and n >= 2");
  Eigen::VectorXd x = newton(prob, x0, lo).x;
  double la = lo;
  double fa = complex_lead(prob, x, la, im_floor, nullptr);
  for (int i = 1; i < n; ++i) {
    const double lb = lo + (hi - lo) * i / (n - 1);
    const Eigen::VectorXd xb = newton(prob, x, lb).x;
    const double fb = complex_lead(prob, xb, lb, im_floor, nullptr);
    if (std::isfinite(fa) && std::isfinite(fb) && (fa > 0.0) != (fb > 0.0)) {
      double a = la, b = lb;
      Eigen::VectorXd xa = x;
      const bool sa = fa > 0.0;
      HopfPoint hp;
      while (b - a > tol * std::max(1.0, std::abs(a))) {
        const double m = 0.5 * (a + b);
        const Eigen::VectorXd xm = newton(prob, xa, m).x;
        const double fm = complex_lead(prob, xm, m, im_floor, nullptr);
        if (!std::isfinite(fm)) break;
        if ((fm > 0.0) == sa) {
          a = m;
          xa = xm;
        } else {
          b = m;
        }
      }
      hp.lambda = 0.5 * (a + b);
      hp.x = newton(prob, xa, hp.lambda).x;
      cplx pair{};
      complex_lead(prob, hp.x, hp.lambda, im_floor, &pair);
      hp.pair = pair;
      hp.frequency = pair.imag();
      return hp;
    }
    x = xb;
    la = lb;
    fa = fb;
  }
  return std::nullopt;
}

AmplitudeFit periodic_amplitude_fit(const std::vector<double>& lambda, const std::vector<double>& amplitude,
                                    double lambda_c) {
  if (lambda.size() != amplitude.size() || lambda.size() < 2)
    throw ParameterError("amplitude fit: need at least two (lambda, amplitude) pairs");
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double d = lambda[i] - lambda_c;
    if (!(d > 0.0)) throw ParameterError("amplitude fit: samples must lie above the critical value");
    if (!(amplitude[i] > 0.0) || !std::isfinite(amplitude[i]))
      throw NumericError("amplitude fit: non-oscillatory sample (amplitude not positive)");
    X.push_back(std::log(d));
    Y.push_back(std::log(amplitude[i]));
  }
  const double m = static_cast<double>(X.size());
  const double mx = std::accumulate(X.begin(), X.end(), 0.0) / m;
  const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("amplitude fit: samples at a single parameter value");
  AmplitudeFit fit;
  fit.p = sxy / sxx;
  fit.c = std::exp(my - fit.p * mx);
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  double sdd = 0.0, sda = 0.0, ma = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double d = lambda[i] - lambda_c;
    sdd += d * d;
    sda += d * amplitude[i];
    ma += amplitude[i] / m;
  }
  fit.linear_a = sda / sdd;
  double ssr = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double d = lambda[i] - lambda_c;
    ssr += std::pow(amplitude[i] - fit.linear_a * d, 2);
    sst += std::pow(amplitude[i] - ma, 2);
  }
  fit.linear_r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  fit.reportable = fit.r2 > 0.99;
  return fit;
}

double oscillation_amplitude(const std::vector<double>& signal, double fraction) {
  if (signal.empty()) return 0.0;
  const auto start = static_cast<std::size_t>(static_cast<double>(signal.size()) * (1.0 - fraction));
  const auto [mn, mx] = std::minmax_element(signal.begin() + static_cast<std::ptrdiff_t>(start), signal.end());
  return 0.5 * (*mx - *mn);
}

double oscillation_frequency(const std::vector<double>& t, const std::vector<double>& signal, double fraction) {
  if (t.size() != signal.size() || t.size() < 3) return 0.0;
  const auto start = static_cast<std::size_t>(static_cast<double>(signal.size()) * (1.0 - fraction));
  double mean = 0.0;
  for (std::size_t i = start; i < signal.size(); ++i) mean += signal[i];
  mean /= static_cast<double>(signal.size() - start);
  std::vector<double> cross;
  for (std::size_t i = start + 1; i < signal.size(); ++i) {
    const double a = signal[i - 1] - mean, b = signal[i] - mean;
    if (a < 0.0 && b >= 0.0) cross.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
  }
  if (cross.size() < 2) return 0.0;
  return 2.0 * kPi * static_cast<double>(cross.size() - 1) / (cross.back() - cross.front());
}

std::vector<double> hopf_trajectory(const HopfNormalForm& nf, double mu, double t_end, double dt,
                                    std::vector<double>* t) {
  Eigen::VectorXd x(2);
  x << 0.1, 0.0;
  std::vector<double> out;
  const auto steps = static_cast<long>(std::ceil(t_end / dt));
  out.reserve(static_cast<std::size_t>(steps) + 1);
  if (t) t->clear();
  for (long i = 0; i <= steps; ++i) {
    out.push_back(x[0]);
    if (t) t->push_back(static_cast<double>(i) * dt);
    const Eigen::VectorXd k1 = nf.residual(x, mu);
    const Eigen::VectorXd k2 = nf.residual(x + 0.5 * dt * k1, mu);
    const Eigen::VectorXd k3 = nf.residual(x + 0.5 * dt * k2, mu);
    const Eigen::VectorXd k4 = nf.residual(x + dt * k3, mu);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

}  // namespace walker::continuation
