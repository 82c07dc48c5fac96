#include "walker/transition.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "walker/error.hpp"

namespace walker::transition {

namespace {

int block_size(const Grid& g, int k) { return k == 0 ? 2 * g.Nz() + 1 : 2 * g.Nz(); }

Eigen::VectorXcd extract(const SpectralState& s, const Grid& g, int k) {
  const int Nz = g.Nz();
  Eigen::VectorXcd v(block_size(g, k));
  if (k == 0) {
    for (int j = 0; j <= Nz; ++j) v[j] = s.mean(j);
    for (int j = 1; j <= Nz; ++j) v[Nz + j] = s.theta(0, j).real();
  } else {
    for (int j = 1; j <= Nz; ++j) {
      v[j - 1] = s.psi(k, j);
      v[Nz + j - 1] = s.theta(k, j);
    }
  }
  return v;
}

void insert(const Eigen::VectorXcd& v, const Grid& g, int k, SpectralState& s) {
  const int Nz = g.Nz();
  if (k == 0) {
    for (int j = 0; j <= Nz; ++j) s.mean(j) = v[j].real();
    for (int j = 1; j <= Nz; ++j) s.theta(0, j) = v[Nz + j].real();
  } else {
    for (int j = 1; j <= Nz; ++j) {
      s.psi(k, j) = v[j - 1];
      s.theta(k, j) = v[Nz + j - 1];
    }
  }
}

SpectralState project_out(SpectralState s, const linstab::CriticalPair& pair, const Grid& g) {
  const double w = pair.weight;
  for (const SpectralState* v : {&pair.psi1.state, &pair.psi1_tilde.state}) {
    s.axpy(-inner(s, *v, g, w) / inner(*v, *v, g, w), *v);
  }
  return s;
}

}  // namespace

CenterManifoldField center_manifold_leading(const dynamics::Model& model, const linstab::CriticalPair& pair,
                                            const SpectralState& e1, double cond_tol) {
  const Grid& g = model.grid();
  const NondimParams& p = model.params();
  const int kc = pair.crit.kc;
  if (2 * kc > g.K()) {
    throw RepresentationError("center manifold: the grid must resolve zonal wavenumber 2 kc = " +
                              std::to_string(2 * kc));
  }
  const double w = pair.weight;
  const SpectralState rhs = project_out(model.bilinear(e1, e1), pair, g);
  CenterManifoldField out;
  out.Psi = SpectralState(g);
  for (int k = 0; k <= g.K(); ++k) {
    const Eigen::VectorXcd b = extract(rhs, g, k);
    const Eigen::MatrixXcd op = linstab::assemble_linear_block(p, p.R, k, g, w).op();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op, true);
    if (es.info() != Eigen::Success) throw NumericError("center manifold: eigen iteration failed");
    const Eigen::VectorXcd& ev = es.eigenvalues();
    Eigen::VectorXcd x;
    if (k == kc) {
      // complement solve: drop the critical directions
      const Eigen::MatrixXcd& V = es.eigenvectors();
      Eigen::VectorXcd c = V.partialPivLu().solve(-b);
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::abs(ev[i]) < cond_tol ? cplx{} : c[i] / ev[i];
      x = V * c;
    } else {
      double mn = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < ev.size(); ++i) mn = std::min(mn, std::abs(ev[i]));
      if (mn < cond_tol) {
        throw NumericError("center manifold: block k = " + std::to_string(k) +
                           " has a near-zero eigenvalue (" + std::to_string(mn) + "); ill-conditioned solve");
      }
      x = op.partialPivLu().solve(-b);
    }
    insert(x, g, k, out.Psi);
  }
  out.Psi.enforce_reality();
  out.Psi = project_out(out.Psi, pair, g);

  SpectralState res = model.linear(out.Psi);
  res += rhs;  // L Psi + rhs = 0
  const double rn = norm(rhs, g, w);
  out.residual = rn > 0.0 ? norm(res, g, w) / rn : norm(res, g, w);
  const double pn = norm(out.Psi, g, w);
  if (pn > 0.0) {
    out.orth_psi1 = inner(out.Psi, pair.psi1.state, g, w) / pn;
    out.orth_psi1t = inner(out.Psi, pair.psi1_tilde.state, g, w) / pn;
  }
  const double big = out.Psi.max_abs();
  for (int k = 0; k <= g.K(); ++k) {
    double m = 0.0;
    for (int j = 1; j <= g.Nz(); ++j) m = std::max({m, std::abs(out.Psi.psi(k, j)), std::abs(out.Psi.theta(k, j))});
    if (k == 0)
      for (int j = 0; j <= g.Nz(); ++j) m = std::max(m, std::abs(out.Psi.mean(j)));
    if (m > 1e-10 * big) out.wavenumbers.push_back(k);
  }
  return out;
}

CenterManifoldField center_manifold_leading(const dynamics::Model& model, const linstab::CriticalPair& pair) {
  return center_manifold_leading(model, pair, pair.psi1.state);
}

TransitionNumber transition_number(const NondimParams& p, const Grid& g, const TransitionOptions& opt) {
  TransitionNumber tn;
  tn.pair = linstab::critical_pair(p, g, g.K());
  auto& pair = tn.pair;
  if (opt.weight) {
    if (!(*opt.weight > 0.0)) throw ParameterError("transition_number: weight must be positive");
    pair.weight = *opt.weight;
    pair.psi1.state *= 1.0 / norm(pair.psi1.state, g, pair.weight);
    pair.psi1_tilde.state *= 1.0 / norm(pair.psi1_tilde.state, g, pair.weight);
  }
  const double w = pair.weight;
  tn.weight = w;
  SpectralState e1 = std::cos(opt.phase) * pair.psi1.state;
  e1.axpy(std::sin(opt.phase), pair.psi1_tilde.state);
  e1 *= opt.scale;

  const dynamics::Model m(p.with_R(pair.crit.Rc), g);
  tn.cm = center_manifold_leading(m, pair, e1);
  const SpectralState& Psi = tn.cm.Psi;
  const double n2 = inner(e1, e1, g, w);
  SpectralState sym = m.bilinear(Psi, e1);
  sym += m.bilinear(e1, Psi);
  tn.alpha_t = inner(sym, e1, g, w) / n2;
  const SpectralState G11 = m.bilinear(e1, e1);
  tn.alpha_route2 = -inner(G11, Psi, g, w) / n2;
  tn.alpha_route3 = inner(m.linear(Psi), Psi, g, w) / n2;
  tn.quadratic = inner(G11, e1, g, w) / (n2 * std::sqrt(n2));
  const double gscale = norm(G11, g, w) / n2;
  tn.k_order = std::abs(tn.quadratic) > 1e-9 * std::max(gscale, 1e-300) ? 2 : 3;
  return tn;
}

ReducedModel reduced_model(const NondimParams& p, const Grid& g) {
  const TransitionNumber tn = transition_number(p, g);
  ReducedModel rm;
  rm.lambda0 = tn.pair.crit.Rc;
  const int kc = tn.pair.crit.kc;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 5; ++i) {
    const double R = rm.lambda0 * (0.98 + 0.01 * i);
    const double b = linstab::block_eigenvalues(p, R, kc, g)[0].real();
    rm.beta1.push_back({R, b});
    const double x = R - rm.lambda0;
    sx += x;
    sy += b;
    sxx += x * x;
    sxy += x * b;
  }
  rm.slope = (5 * sxy - sx * sy) / (5 * sxx - sx * sx);
  rm.intercept = (sy - rm.slope * sx) / 5;
  rm.k_order = tn.k_order;
  rm.alpha_t = tn.k_order == 2 ? tn.quadratic : tn.alpha_t;
  rm.e1 = tn.pair.psi1.state;
  rm.e1star = rm.e1;
  return rm;
}

ReducedModel normal_form(int k_order, double alpha_t, double slope, double lambda0) {
  if (k_order < 2) throw ParameterError("normal_form: k_order must be >= 2");
  ReducedModel rm;
  rm.lambda0 = lambda0;
  rm.k_order = k_order;
  rm.alpha_t = alpha_t;
  rm.slope = slope;
  for (int i = -2; i <= 2; ++i) rm.beta1.push_back({lambda0 + 0.01 * i, slope * 0.01 * i});
  return rm;
}

std::string to_string(TransitionType t) {
  switch (t) {
    case TransitionType::I:
      return "I";
    case TransitionType::II:
      return "II";
    case TransitionType::III:
      return "III";
  }
  return "?";
}

TransitionReport classify(const ReducedModel& rm) {
  if (rm.alpha_t == 0.0 || !std::isfinite(rm.alpha_t)) {
    throw NumericError("classify: alpha_t = 0, higher-order terms are needed");
  }
  if (rm.slope == 0.0 || !std::isfinite(rm.slope)) {
    throw NumericError("classify: beta1 does not cross transversally");
  }
  if (rm.k_order < 2) throw ParameterError("classify: k_order must be >= 2");
  TransitionReport rep;
  rep.lambda0 = rm.lambda0;
  rep.alpha_t = rm.alpha_t;
  rep.k_order = rm.k_order;
  const double coef = std::pow(std::abs(rm.slope / rm.alpha_t), 1.0 / (rm.k_order - 1));
  const bool unstable_above = rm.slope > 0.0;
  if (rm.k_order % 2 == 1) {
    if (rm.alpha_t < 0.0) {
      rep.type = TransitionType::I;
      rep.branches.push_back({unstable_above, 2, coef, 0.0, "attractor"});
      rep.notes.push_back("continuous transition: attracting bifurcated branch on the unstable side");
    } else {
      rep.type = TransitionType::II;
      rep.branches.push_back({!unstable_above, 2, coef, 0.0, "saddle"});
      rep.notes.push_back("jump transition: subcritical saddles, no local attractor past criticality");
    }
  } else {
    rep.type = TransitionType::III;
    const double s = rm.alpha_t > 0.0 ? 1.0 : -1.0;
    rep.branches.push_back({unstable_above, 1, coef, -s, "attractor"});
    rep.branches.push_back({!unstable_above, 1, coef, s, "saddle"});
    rep.notes.push_back("mixed transition: one-sided basin of the bifurcated attractor");
  }
  return rep;
}

std::vector<double> branch_points(const TransitionReport& rep, const ReducedModel& rm, double lambda) {
  std::vector<double> pts;
  const double b = rm.beta_at(lambda);
  const bool above = lambda > rm.lambda0;
  if (lambda == rm.lambda0) return pts;
  const double amp = std::pow(std::abs(b / rm.alpha_t), 1.0 / (rm.k_order - 1));
  for (const auto& br : rep.branches) {
    if (br.above != above) continue;
    if (br.count == 2) {
      pts.push_back(-amp);
      pts.push_back(amp);
    } else {
      pts.push_back(br.sign * amp);
    }
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

namespace {

struct Limit {
  bool escaped = false;
  bool converged = false;
  double x = 0.0;
};

Limit integrate_scalar(double beta, double alpha, int k, double x0, double dir, double escape) {
  auto f = [&](double x) {
    double xk = x;
    for (int i = 1; i < k; ++i) xk *= x;
    return dir * (beta * x + alpha * xk);
  };
  const double dt = 0.01;
  double x = x0;
  for (long n = 0; n < 2000000; ++n) {
    const double k1 = f(x), k2 = f(x + 0.5 * dt * k1), k3 = f(x + 0.5 * dt * k2), k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!std::isfinite(x) || std::abs(x) >= escape) return {true, false, x};
    if (std::abs(f(x)) < 1e-13) return {false, true, x};
  }
  return {false, false, x};
}

void add_unique(std::vector<double>& v, double x) {
  for (double y : v)
    if (std::abs(y - x) < 1e-7) return;
  v.push_back(x);
}

}  // namespace

OracleResult normal_form_oracle(int k_order, double alpha_t, double slope, const std::vector<double>& lambdas,
                                double escape) {
  OracleResult out;
  static const double fan[] = {1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9, 1.1, 1.3};
  std::vector<TransitionType> votes;
  bool ok = true;
  for (double lam : lambdas) {
    OracleLambda ol;
    ol.lambda = lam;
    const double beta = slope * lam;
    for (double a : fan) {
      if (a >= escape) continue;
      for (double x0 : {a, -a}) {
        // a start on a fixed point says nothing about its stability
        if (std::abs(beta * x0 + alpha_t * std::pow(x0, k_order)) < 1e-12) continue;
        const Limit fw = integrate_scalar(beta, alpha_t, k_order, x0, 1.0, escape);
        if (fw.escaped) {
          ++ol.escaped;
        } else if (fw.converged) {
          ++ol.converged;
          add_unique(ol.attractors, std::abs(fw.x) < 1e-8 ? 0.0 : fw.x);
        }
        const Limit bw = integrate_scalar(beta, alpha_t, k_order, x0, -1.0, escape);
        if (bw.converged && std::abs(bw.x) > 1e-8) add_unique(ol.repellers, bw.x);
      }
    }
    std::sort(ol.attractors.begin(), ol.attractors.end());
    std::sort(ol.repellers.begin(), ol.repellers.end());
    std::vector<double> nonzero;
    for (double x : ol.attractors)
      if (x != 0.0) nonzero.push_back(x);
    if (beta > 0.0) {
      if (nonzero.size() == 2 && ol.escaped == 0) votes.push_back(TransitionType::I);
      else if (nonzero.empty() && ol.escaped > 0) votes.push_back(TransitionType::II);
      else if (nonzero.size() == 1 && ol.escaped > 0) votes.push_back(TransitionType::III);
      else ok = false;
    } else if (beta < 0.0) {
      const bool zero_attracts = std::find(ol.attractors.begin(), ol.attractors.end(), 0.0) != ol.attractors.end();
      if (!zero_attracts) ok = false;
      if (ol.repellers.empty() && ol.escaped == 0) votes.push_back(TransitionType::I);
      else if (ol.repellers.size() == 2) votes.push_back(TransitionType::II);
      else if (ol.repellers.size() == 1) votes.push_back(TransitionType::III);
      else ok = false;
    }
    out.per_lambda.push_back(std::move(ol));
  }
  if (!votes.empty()) {
    out.observed = votes.front();
    for (TransitionType t : votes)
      if (t != out.observed) ok = false;
  } else {
    ok = false;
  }
  out.consistent = ok;
  return out;
}

PredictedBranch predict_branch(const NondimParams& p, const Grid& g, double R, double theta,
                               const TransitionNumber& tn) {
  const double Rc = tn.pair.crit.Rc;
  if (!(R > Rc)) throw ParameterError("predict_branch: R must exceed Rc");
  PredictedBranch b;
  b.R = R;
  const int kc = tn.pair.crit.kc;
  b.beta1 = linstab::block_eigenvalues(p, R, kc, g)[0].real();
  b.r = std::sqrt(std::abs(b.beta1 / tn.alpha_t));
  b.alpha_wav = g.alpha(kc);
  b.theta = theta;
  b.state = shift(tn.pair.psi1_tilde.state, g, -theta);
  b.state *= b.r;
  b.e0_amplitude = b.r * 2.0 * tn.pair.psi1_tilde.state.psi(kc, 1).real();
  return b;
}

std::pair<double, double> e0_velocity(const PredictedBranch& b, double x1, double z) {
  const double ph = b.alpha_wav * (x1 + b.theta);
  return {kPi * b.e0_amplitude * std::cos(ph) * std::cos(kPi * z),
          b.alpha_wav * b.e0_amplitude * std::sin(ph) * std::sin(kPi * z)};
}

}  // namespace walker::transition
