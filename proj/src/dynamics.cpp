#include "walker/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "walker/error.hpp"
#include "walker/kernels.hpp"

namespace walker::dynamics {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Steady:
      return "steady";
    case Verdict::Periodic:
      return "periodic";
    case Verdict::Transient:
      return "transient";
  }
  return "transient";
}

Model::Model(const NondimParams& p, const Grid& g) : Model(p, g, no_forcing(g)) {}

Model::Model(const NondimParams& p, const Grid& g, const ForcingProfile& f)
    : p_(validate(p)), g_(g), tr_(g), f_(f) {
  if (std::abs(p.r0 - g.r0()) > 1e-14 * std::max(1.0, p.r0)) {
    throw ParameterError("model: parameter r0 and grid r0 differ");
  }
  validate(f_, g_);
  forced_ = !f_.is_zero();
  lift_ = lift_fields(f_, tr_);
  const std::vector<double> zero(tr_.points(), 0.0);
  lift_buoy_ = tr_.project(zero, lift_.T, zero);
  ForcingProfile lap = f_;
  for (int k = 1; k <= g_.K(); ++k) lap.phi[static_cast<std::size_t>(k)] *= -g_.alpha(k) * g_.alpha(k);
  const GradFields lapT = lift_fields(lap, tr_);
  lift_heat_ = tr_.project(zero, zero, lapT.T);
  for (int k = 0; k <= g_.K(); ++k)
    for (int j = 1; j <= g_.Nz(); ++j) lift_heat_.theta(k, j) += f_.Q.theta(k, j);
  lift_heat_.enforce_reality();
  rebuild_source();
}

double Model::weight() const { return p_.R > 0.0 ? default_weight(p_.Pr, p_.R) : p_.Pr; }

void Model::set_R(double R) {
  p_.R = R;
  validate(p_);
  rebuild_source();
}

void Model::rebuild_source() {
  source_ = lift_heat_;
  source_.axpy(p_.Pr * p_.R, lift_buoy_);
}

SpectralState Model::diagonal(const SpectralState& s) const {
  SpectralState r(g_);
  const double Pr = p_.Pr, d0 = p_.deltaP0(), d1 = p_.deltaP1();
  for (int j = 0; j <= g_.Nz(); ++j) r.mean(j) = -Pr * ((j * kPi) * (j * kPi) + d0) * s.mean(j);
  for (int j = 1; j <= g_.Nz(); ++j) r.theta(0, j) = -(j * kPi) * (j * kPi) * s.theta(0, j).real();
  for (int k = 1; k <= g_.K(); ++k) {
    const double a2 = g_.alpha(k) * g_.alpha(k);
    for (int j = 1; j <= g_.Nz(); ++j) {
      const double jp2 = (j * kPi) * (j * kPi);
      const double q = jp2 + a2;
      r.psi(k, j) = -Pr * (q + (d0 * jp2 + d1 * a2) / q) * s.psi(k, j);
      r.theta(k, j) = -q * s.theta(k, j);
    }
  }
  return r;
}

namespace {

void add_coupling(const SpectralState& s, const Grid& g, const NondimParams& p, SpectralState& r) {
  const cplx I{0.0, 1.0};
  for (int k = 1; k <= g.K(); ++k) {
    const double a = g.alpha(k);
    for (int j = 1; j <= g.Nz(); ++j) {
      const double q = (j * kPi) * (j * kPi) + a * a;
      r.psi(k, j) += I * (p.Pr * a * p.R / q) * s.theta(k, j);
      r.theta(k, j) += -I * a * s.psi(k, j);
    }
  }
}

// f = -[(a.grad) b1 + a1 b2 / r0, (a.grad) b2 - a1 b1 / r0, (a.grad) Tb]
void nonlinear_terms(const GradFields& a, const GradFields& b, double r0, std::vector<double>& f1,
                     std::vector<double>& f2, std::vector<double>& fT) {
  const auto& kt = kernels::active();
  const std::size_t n = a.u1.size();
  f1.resize(n);
  f2.resize(n);
  fT.resize(n);
  kt.advect(n, a.u1.data(), b.u1x.data(), a.u2.data(), b.u1z.data(), -1.0, f1.data());
  kt.mul_acc(n, a.u1.data(), b.u2.data(), -1.0 / r0, f1.data());
  kt.advect(n, a.u1.data(), b.u2x.data(), a.u2.data(), b.u2z.data(), -1.0, f2.data());
  kt.mul_acc(n, a.u1.data(), b.u1.data(), 1.0 / r0, f2.data());
  kt.advect(n, a.u1.data(), b.Tx.data(), a.u2.data(), b.Tz.data(), -1.0, fT.data());
}

}  // namespace

SpectralState Model::linear(const SpectralState& s) const {
  SpectralState r = diagonal(s);
  add_coupling(s, g_, p_, r);
  return r;
}

SpectralState Model::bilinear(const SpectralState& a, const SpectralState& b) const {
  GradFields ga, gb;
  tr_.gradients(a, ga);
  tr_.gradients(b, gb);
  std::vector<double> f1, f2, fT;
  nonlinear_terms(ga, gb, g_.r0(), f1, f2, fT);
  return tr_.project(f1, f2, fT);
}

SpectralState Model::lift_advection(const SpectralState& a) const {
  if (!forced_) return SpectralState(g_);
  GradFields ga;
  tr_.gradients(a, ga);
  const auto& kt = kernels::active();
  const std::size_t n = ga.u1.size();
  std::vector<double> zero(n, 0.0), fT(n);
  kt.advect(n, ga.u1.data(), lift_.Tx.data(), ga.u2.data(), lift_.Tz.data(), -1.0, fT.data());
  return tr_.project(zero, zero, fT);
}

SpectralState Model::explicit_part(const SpectralState& s) const {
  GradFields gs;
  tr_.gradients(s, gs, forced_ ? &lift_ : nullptr);
  std::vector<double> f1, f2, fT;
  nonlinear_terms(gs, gs, g_.r0(), f1, f2, fT);
  SpectralState r = tr_.project(f1, f2, fT);
  add_coupling(s, g_, p_, r);
  if (forced_) r += source_;
  return r;
}

SpectralState Model::tendency(const SpectralState& s) const {
  SpectralState r = diagonal(s);
  r += explicit_part(s);
  return r;
}

Eigen::MatrixXd Model::jacobian(const SpectralState& y) const {
  GradFields gy, gv;
  tr_.gradients(y, gy, forced_ ? &lift_ : nullptr);
  const auto n = static_cast<Eigen::Index>(y.real_size());
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  std::vector<double> f1, f2, fT, h1, h2, hT;
  SpectralState v(g_);
  for (Eigen::Index i = 0; i < n; ++i) {
    e[i] = 1.0;
    v.unpack(e);
    e[i] = 0.0;
    tr_.gradients(v, gv);
    nonlinear_terms(gy, gv, g_.r0(), f1, f2, fT);
    nonlinear_terms(gv, gy, g_.r0(), h1, h2, hT);
    for (std::size_t m = 0; m < f1.size(); ++m) {
      f1[m] += h1[m];
      f2[m] += h2[m];
      fT[m] += hT[m];
    }
    SpectralState col = tr_.project(f1, f2, fT);
    col += linear(v);
    J.col(i) = col.pack();
  }
  return J;
}

double Model::max_speed(const SpectralState& s) const {
  const PhysicalFields f = tr_.fields(s);
  double m = 0.0;
  for (std::size_t i = 0; i < f.u1.size(); ++i) m = std::max(m, std::hypot(f.u1[i], f.u2[i]));
  return m;
}

SpectralState tendency(const SpectralState& s, const NondimParams& p, const Grid& g) {
  return Model(p, g).tendency(s);
}

// ---------------------------------------------------------------------------

namespace {

// y <- ((1 + h d) y + rhs) / (1 - h d), elementwise over the diagonal d.
void cn_update(const Model& m, double h, double dt, const SpectralState& rhs, SpectralState& y) {
  const Grid& g = m.grid();
  const NondimParams& p = m.params();
  const double Pr = p.Pr, d0 = p.deltaP0(), d1 = p.deltaP1();
  auto upd = [h, dt](double d, auto& v, auto rv) { v = ((1.0 + h * d) * v + dt * rv) / (1.0 - h * d); };
  for (int j = 0; j <= g.Nz(); ++j) upd(-Pr * ((j * kPi) * (j * kPi) + d0), y.mean(j), rhs.mean(j));
  for (int j = 1; j <= g.Nz(); ++j) upd(-(j * kPi) * (j * kPi), y.theta(0, j), rhs.theta(0, j));
  for (int k = 1; k <= g.K(); ++k) {
    const double a2 = g.alpha(k) * g.alpha(k);
    for (int j = 1; j <= g.Nz(); ++j) {
      const double jp2 = (j * kPi) * (j * kPi);
      const double q = jp2 + a2;
      upd(-Pr * (q + (d0 * jp2 + d1 * a2) / q), y.psi(k, j), rhs.psi(k, j));
      upd(-q, y.theta(k, j), rhs.theta(k, j));
    }
  }
  y.enforce_reality();
}

void check_finite(const SpectralState& s, double t) {
  const double m = s.max_abs();
  if (!std::isfinite(m) || m > 1e100) {
    std::ostringstream os;
    os << "integration blew up at t = " << t;
    throw NumericError(os.str());
  }
}

}  // namespace

Stepper::Stepper(const Model& m, double dt) : m_(m), dt_(dt) {
  if (!(dt > 0.0)) throw ParameterError("stepper: dt must be positive");
}

void Stepper::set_dt(double dt) {
  if (!(dt > 0.0)) throw ParameterError("stepper: dt must be positive");
  dt_ = dt;
  have_prev_ = false;
}

void Stepper::step(SpectralState& s) {
  SpectralState En = m_.explicit_part(s);
  const double t0 = s.time;
  if (!have_prev_) {
    SpectralState half = s;
    cn_update(m_, 0.25 * dt_, 0.5 * dt_, En, half);
    const SpectralState Eh = m_.explicit_part(half);
    cn_update(m_, 0.5 * dt_, dt_, Eh, s);
    have_prev_ = true;
  } else {
    SpectralState rhs = En;
    rhs *= 1.5;
    rhs.axpy(-0.5, prev_);
    cn_update(m_, 0.5 * dt_, dt_, rhs, s);
  }
  prev_ = std::move(En);
  s.time = t0 + dt_;
  check_finite(s, s.time);
}

SpectralState step(const SpectralState& s, const Model& m, double dt) {
  Stepper st(m, dt);
  SpectralState r = s;
  st.step(r);
  return r;
}

Amplitude amplitude_of(const SpectralState& s, const linstab::CriticalPair& pair, const Grid& g) {
  const double w = pair.weight;
  const SpectralState& e1 = pair.psi1.state;
  const SpectralState& e2 = pair.psi1_tilde.state;
  const double c = inner(s, e1, g, w) / inner(e1, e1, g, w);
  const double d = inner(s, e2, g, w) / inner(e2, e2, g, w);
  return {std::hypot(c, d), std::atan2(d, c)};
}

SpectralState random_ic(const Grid& g, std::uint64_t seed, double amp, int kmax) {
  std::mt19937_64 rng(seed);
  return random_state(g, rng, amp, kmax);
}

Trajectory integrate(const SpectralState& s0, const Model& m, const RunConfig& cfg,
                     const linstab::CriticalPair* pair) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || !(cfg.convergence_tol > 0.0) || !(cfg.tendency_tol > 0.0)) {
    throw ParameterError("integrate: dt, t_end and tolerances must be positive");
  }
  const Grid& g = m.grid();
  const double w = m.weight();
  Trajectory out;
  SpectralState s = s0;
  s.enforce_reality();
  Stepper st(m, cfg.dt);
  const int every = std::max(1, cfg.diag_every);
  const double dx = g.Lx() / g.Nx();
  double next_snap = s.time;
  SpectralState last_check = s;
  double last_check_t = s.time;
  const double t_stop = s0.time + cfg.t_end;

  auto record = [&](double tend_norm) {
    Diagnostic d;
    d.t = s.time;
    d.norm = norm(s, g, w);
    d.energy = 0.5 * d.norm * d.norm;
    d.mean_flow = vertical_integral_u1(s);
    d.tendency_norm = tend_norm;
    if (pair != nullptr) {
      const Amplitude a = amplitude_of(s, *pair, g);
      d.amp_r = a.r;
      d.amp_theta = a.theta;
    }
    out.diagnostics.push_back(d);
    return d;
  };

  bool steady = false;
  for (long n = 0; s.time < t_stop - 1e-12 * cfg.dt; ++n) {
    if (cfg.snapshot_interval > 0.0 && s.time >= next_snap - 1e-12) {
      out.snapshots.push_back({s.time, s});
      next_snap += cfg.snapshot_interval;
    }
    if (n % every == 0) {
      const double tn = norm(m.tendency(s), g, w);
      const Diagnostic d = record(tn);
      if (m.max_speed(s) * st.dt() / dx > cfg.cfl_max) {
        st.set_dt(0.5 * st.dt());
        out.warnings.push_back("time step halved by the CFL guard at t = " + std::to_string(s.time));
      }
      const double span = s.time - last_check_t;
      bool change_ok = false;
      if (span > 0.0 && d.norm > 1e-12) {
        change_ok = norm(s - last_check, g, w) / (d.norm * span) < cfg.convergence_tol;
      }
      if (cfg.rest_norm > 0.0 && d.norm < cfg.rest_norm) {
        steady = true;
        break;
      }
      if (tn < cfg.tendency_tol * std::max(1.0, d.norm) || change_ok) {
        steady = true;
        if (cfg.stop_when_steady) break;
      } else {
        steady = false;
      }
      last_check = s;
      last_check_t = s.time;
    }
    // last step lands on t_stop
    if (s.time + st.dt() > t_stop) st.set_dt(std::max(t_stop - s.time, 1e-14));
    st.step(s);
    ++out.steps;
  }
  out.final_tendency = norm(m.tendency(s), g, w);
  if (out.diagnostics.empty() || out.diagnostics.back().t < s.time) record(out.final_tendency);
  if (cfg.snapshot_interval > 0.0 && (out.snapshots.empty() || out.snapshots.back().t < s.time)) {
    out.snapshots.push_back({s.time, s});
  }
  if (!steady) steady = out.final_tendency < cfg.tendency_tol * std::max(1.0, norm(s, g, w));
  out.dt_used = st.dt();
  if (steady) {
    out.verdict = Verdict::Steady;
  } else {
    // sustained oscillation: at least three energy maxima of similar height in the second half
    const auto& dg = out.diagnostics;
    std::vector<double> peaks;
    for (std::size_t i = dg.size() / 2 + 1; i + 1 < dg.size(); ++i) {
      if (dg[i].energy > dg[i - 1].energy && dg[i].energy >= dg[i + 1].energy) peaks.push_back(dg[i].energy);
    }
    if (peaks.size() >= 3) {
      const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
      if (*hi > 0.0 && (*hi - *lo) / *hi < 0.05) out.verdict = Verdict::Periodic;
    }
  }
  out.final_state = std::move(s);
  return out;
}

std::string diagnostics_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t,energy,norm,amp_r,amp_theta,mean_flow,tendency_norm\n";
  for (const auto& d : tr.diagnostics) {
    os << d.t << ',' << d.energy << ',' << d.norm << ',' << d.amp_r << ',' << d.amp_theta << ','
       << d.mean_flow << ',' << d.tendency_norm << '\n';
  }
  return os.str();
}

}  // namespace walker::dynamics
