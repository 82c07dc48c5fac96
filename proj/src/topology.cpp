#include "walker/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include <boost/math/tools/toms748_solve.hpp>

namespace walker::topology {

std::string to_string(PointKind k) {
  switch (k) {
    case PointKind::Center:
      return "center";
    case PointKind::Saddle:
      return "saddle";
    case PointKind::Degenerate:
      return "degenerate";
  }
  return "degenerate";
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::Rolls:
      return "Rolls";
    case Pattern::CrossChannelEast:
      return "CrossChannelEast";
    case Pattern::CrossChannelWest:
      return "CrossChannelWest";
    case Pattern::Degenerate:
      return "Degenerate";
  }
  return "Degenerate";
}

namespace {

double wrap(double x, double L) {
  x = std::fmod(x, L);
  return x < 0.0 ? x + L : x;
}

// signed periodic difference a - b in (-L/2, L/2]
double pdiff(double a, double b, double L) { return wrap(a - b + 0.5 * L, L) - 0.5 * L; }

struct Scales {
  double grad = 0.0;  // largest |grad psi|
  double hess = 0.0;  // largest second derivative
};

Scales sample_scales(const SpectralState& s, const Grid& g, int nx, int nz) {
  Scales sc;
  for (int i = 0; i < nx; ++i)
    for (int m = 0; m <= nz; ++m) {
      const PointValue pv = evaluate(s, g, g.Lx() * i / nx, static_cast<double>(m) / nz);
      sc.grad = std::max({sc.grad, std::abs(pv.psi_x), std::abs(pv.psi_z)});
      sc.hess = std::max({sc.hess, std::abs(pv.psi_xx), std::abs(pv.psi_xz), std::abs(pv.psi_zz)});
    }
  return sc;
}

int seeds_x(const Grid& g, const TopologyOptions& opt) {
  return opt.seeds_x > 0 ? opt.seeds_x : std::max(32, 12 * g.K());
}

}  // namespace

std::vector<CriticalPointInfo> find_critical_points(const SpectralState& s, const Grid& g,
                                                    const TopologyOptions& opt) {
  const double L = g.Lx();
  const int nx = seeds_x(g, opt), nz = std::max(2, opt.seeds_z);
  const Scales sc = sample_scales(s, g, nx, nz);
  std::vector<CriticalPointInfo> out;
  if (sc.hess == 0.0) return out;

  auto duplicate = [&](double x, double z) {
    for (const auto& c : out)
      if (std::hypot(pdiff(x, c.x1, L), z - (c.x2 - g.r0())) < opt.dedup) return true;
    return false;
  };

  const double max_step = 0.5 * std::max(L / nx, 1.0 / nz);
  for (int i = 0; i < nx; ++i)
    for (int m = 0; m < nz; ++m) {
      double x = L * (i + 0.5) / nx, z = (m + 0.5) / nz;
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        const PointValue pv = evaluate(s, g, x, z);
        const double a = pv.psi_xx, b = pv.psi_xz, c = pv.psi_zz;
        const double det = a * c - b * b;
        if (std::abs(det) < 1e-300) break;
        double dx = -(c * pv.psi_x - b * pv.psi_z) / det;
        double dz = -(-b * pv.psi_x + a * pv.psi_z) / det;
        const double len = std::hypot(dx, dz);
        if (len > max_step) {
          dx *= max_step / len;
          dz *= max_step / len;
        }
        x = wrap(x + dx, L);
        z += dz;
        if (z <= 0.0 || z >= 1.0) break;
        if (len < 1e-13) {
          const PointValue pc = evaluate(s, g, x, z);
          ok = std::hypot(pc.psi_x, pc.psi_z) < 1e-9 * std::max(sc.grad, 1e-300);
          break;
        }
      }
      if (!ok || z < 1e-9 || z > 1.0 - 1e-9 || duplicate(x, z)) continue;
      const PointValue pv = evaluate(s, g, x, z);
      CriticalPointInfo cp;
      cp.x1 = x;
      cp.x2 = g.r0() + z;
      cp.stream = pv.psi;
      cp.indicator = pv.psi_xx * pv.psi_zz - pv.psi_xz * pv.psi_xz;
      if (std::abs(cp.indicator) < opt.degenerate_tol * sc.hess * sc.hess)
        cp.kind = PointKind::Degenerate;
      else
        cp.kind = cp.indicator > 0.0 ? PointKind::Center : PointKind::Saddle;
      out.push_back(cp);
    }

  // wall points: zeros of u1 along z = 0 and z = 1
  const int nw = 8 * nx;
  for (int wall = 0; wall < 2; ++wall) {
    const double z = wall;
    auto u1 = [&](double x) { return evaluate(s, g, x, z).psi_z; };
    std::vector<double> f(static_cast<std::size_t>(nw) + 1);
    for (int i = 0; i <= nw; ++i) f[static_cast<std::size_t>(i)] = u1(L * i / nw);
    for (int i = 0; i < nw; ++i) {
      const double xa = L * i / nw, xb = L * (i + 1) / nw;
      const double fa = f[static_cast<std::size_t>(i)], fb = f[static_cast<std::size_t>(i) + 1];
      double xr;
      if (fa == 0.0) {
        xr = xa;
      } else if (fa * fb < 0.0) {
        std::uintmax_t iters = 100;
        const auto r = boost::math::tools::toms748_solve(
            u1, xa, xb, fa, fb, [](double p, double q) { return std::abs(p - q) < 1e-15; }, iters);
        xr = 0.5 * (r.first + r.second);
      } else {
        continue;
      }
      xr = wrap(xr, L);
      bool dup = false;
      for (const auto& c : out)
        if (c.wall == wall && std::abs(pdiff(xr, c.x1, L)) < opt.dedup) dup = true;
      if (dup) continue;
      const PointValue pv = evaluate(s, g, xr, z);
      CriticalPointInfo cp;
      cp.x1 = xr;
      cp.x2 = g.r0() + z;
      cp.on_boundary = true;
      cp.wall = wall;
      cp.stream = pv.psi;
      cp.indicator = pv.psi_xz;
      cp.kind = std::abs(pv.psi_xz) < opt.degenerate_tol * sc.hess ? PointKind::Degenerate : PointKind::Saddle;
      out.push_back(cp);
    }
  }
  std::sort(out.begin(), out.end(), [](const CriticalPointInfo& a, const CriticalPointInfo& b) {
    if (a.wall != b.wall) return a.wall < b.wall;
    if (a.x1 != b.x1) return a.x1 < b.x1;
    return a.x2 < b.x2;
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct P2 {
  double x, z;
};

class Tracer {
 public:
  Tracer(const SpectralState& s, const Grid& g, const std::vector<CriticalPointInfo>& pts, const TopologyOptions& o)
      : s_(s), g_(g), pts_(pts), opt_(o), L_(g.Lx()) {}

  Trace run(int from, int ray, P2 dir) const {
    const CriticalPointInfo& cp = pts_[static_cast<std::size_t>(from)];
    const double level = cp.stream;
    const double h = opt_.trace_step;
    const double capture = 0.1 * opt_.connect_tol;
    P2 p{cp.x1 + 10.0 * h * dir.x, cp.x2 - g_.r0() + 10.0 * h * dir.z};
    project(p, level);
    const PointValue pv0 = evaluate(s_, g_, wrap(p.x, L_), p.z);
    const double sgn = (pv0.psi_z * dir.x - pv0.psi_x * dir.z) >= 0.0 ? 1.0 : -1.0;

    Trace t;
    t.from = from;
    t.ray = ray;
    const double max_len = 40.0 * (L_ + 1.0);
    double length = 10.0 * h;
    int steps = 0;
    auto finish = [&](const P2& q, const char* end) {
      t.end = end;
      t.x1_end = wrap(q.x, L_);
      t.x2_end = g_.r0() + std::clamp(q.z, 0.0, 1.0);
      t.length = length;
      t.level_drift = std::abs(evaluate(s_, g_, t.x1_end, std::clamp(q.z, 0.0, 1.0)).psi - level);
      return t;
    };
    while (length < max_len && steps < 4000000) {
      ++steps;
      // nearest saddle (the start one only once the trace has left it)
      int near = -1;
      double near_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < pts_.size(); ++j) {
        const auto& c = pts_[j];
        if (c.kind != PointKind::Saddle) continue;
        if (static_cast<int>(j) == from && length < 30.0 * h) continue;
        const double d = std::hypot(pdiff(c.x1, p.x, L_), c.x2 - g_.r0() - p.z);
        if (d < near_d) {
          near_d = d;
          near = static_cast<int>(j);
        }
      }
      if (near >= 0 && near_d < capture) {
        t.to = near;
        t.distance = near_d;
        return finish(p, pts_[static_cast<std::size_t>(near)].on_boundary ? "wall" : "saddle");
      }
      const double step = std::clamp(0.25 * near_d, 1e-3 * capture, h);
      P2 q = rk4(p, sgn, step);
      project(q, level);
      length += step;
      if (q.z <= 0.0 || q.z >= 1.0) {
        const double wz = q.z <= 0.0 ? 0.0 : 1.0;
        const double a = (wz - p.z) / (q.z - p.z);
        const P2 e{p.x + a * (q.x - p.x), wz};
        const int w = static_cast<int>(wz);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts_.size(); ++j)
          if (pts_[j].wall == w) {
            const double d = std::abs(pdiff(e.x, pts_[j].x1, L_));
            if (d < best) {
              best = d;
              t.to = static_cast<int>(j);
            }
          }
        t.distance = best;
        return finish(e, "wall");
      }
      p = q;
    }
    return finish(p, "limit");
  }

 private:
  P2 field(const P2& p, double sgn) const {
    const PointValue pv = evaluate(s_, g_, wrap(p.x, L_), std::clamp(p.z, 0.0, 1.0));
    const double u = pv.psi_z, v = -pv.psi_x;
    const double n = std::hypot(u, v);
    if (n == 0.0) return {0.0, 0.0};
    return {sgn * u / n, sgn * v / n};
  }

  P2 rk4(const P2& p, double sgn, double h) const {
    const P2 k1 = field(p, sgn);
    const P2 k2 = field({p.x + 0.5 * h * k1.x, p.z + 0.5 * h * k1.z}, sgn);
    const P2 k3 = field({p.x + 0.5 * h * k2.x, p.z + 0.5 * h * k2.z}, sgn);
    const P2 k4 = field({p.x + h * k3.x, p.z + h * k3.z}, sgn);
    return {p.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), p.z + h / 6.0 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z)};
  }

  void project(P2& p, double level) const {
    for (int it = 0; it < 2; ++it) {
      if (p.z <= 0.0 || p.z >= 1.0) return;
      const PointValue pv = evaluate(s_, g_, wrap(p.x, L_), p.z);
      const double g2 = pv.psi_x * pv.psi_x + pv.psi_z * pv.psi_z;
      if (g2 < 1e-300) return;
      const double d = (pv.psi - level) / g2;
      p.x -= d * pv.psi_x;
      p.z -= d * pv.psi_z;
    }
  }

  const SpectralState& s_;
  const Grid& g_;
  const std::vector<CriticalPointInfo>& pts_;
  const TopologyOptions& opt_;
  double L_;
};

}  // namespace

StabilityReport structural_stability_check(const SpectralState& s, const Grid& g,
                                           const std::vector<CriticalPointInfo>& points,
                                           const TopologyOptions& opt) {
  StabilityReport rep;
  rep.in_Htilde = std::abs(vertical_integral_u1(s)) < opt.in_E_tol;
  const Tracer tr(s, g, points, opt);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = points[i];
    if (c.kind == PointKind::Degenerate) {
      rep.regular = false;
      continue;
    }
    if (c.kind != PointKind::Saddle) continue;
    const PointValue pv = evaluate(s, g, c.x1, c.x2 - g.r0());
    std::vector<P2> rays;
    if (c.on_boundary) {
      // level set leaves the wall along (-psi_zz, 2 psi_xz)
      P2 d{-pv.psi_zz, 2.0 * pv.psi_xz};
      if ((c.wall == 0) != (d.z > 0.0)) d = {-d.x, -d.z};
      const double n = std::hypot(d.x, d.z);
      rays.push_back({d.x / n, d.z / n});
    } else {
      Eigen::Matrix2d H;
      H << pv.psi_xx, pv.psi_xz, pv.psi_xz, pv.psi_zz;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
      const double l2 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
      const Eigen::Vector2d e2 = es.eigenvectors().col(0), e1 = es.eigenvectors().col(1);
      for (double sg : {1.0, -1.0}) {
        Eigen::Vector2d d = std::sqrt(-l2) * e1 + sg * std::sqrt(l1) * e2;
        d.normalize();
        rays.push_back({d[0], d[1]});
        rays.push_back({-d[0], -d[1]});
      }
    }
    bool self = true;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      const Trace t = tr.run(static_cast<int>(i), static_cast<int>(r), rays[r]);
      const bool hit = t.to >= 0 && t.distance < opt.connect_tol;
      if (c.on_boundary && t.end == "wall" && hit && points[static_cast<std::size_t>(t.to)].wall != c.wall)
        rep.wall_to_wall = true;
      if (!c.on_boundary && !(t.end == "saddle" && hit && t.to == static_cast<int>(i))) self = false;
      if (t.end == "limit") {
        std::ostringstream os;
        os << "separatrix from point " << i << " reached the length limit";
        rep.notes.push_back(os.str());
      }
      rep.traces.push_back(t);
    }
    if (!c.on_boundary && !self) rep.interior_saddles_self_connected = false;
  }
  rep.stable_in_H = rep.regular && rep.interior_saddles_self_connected && !rep.wall_to_wall;
  rep.stable_in_Htilde = rep.in_Htilde && rep.regular && rep.interior_saddles_self_connected;
  return rep;
}

PatternReport classify_pattern(const SpectralState& s, const Grid& g, const TopologyOptions& opt) {
  PatternReport rep;
  rep.mean_flow = vertical_integral_u1(s);
  rep.in_E = std::abs(rep.mean_flow) < opt.in_E_tol;
  rep.points = find_critical_points(s, g, opt);
  rep.stability = structural_stability_check(s, g, rep.points, opt);
  rep.structurally_stable_in_Htilde = rep.stability.stable_in_Htilde;
  for (const auto& c : rep.points) {
    if (c.kind == PointKind::Degenerate) {
      ++rep.degenerate;
    } else if (!c.on_boundary) {
      ++(c.kind == PointKind::Center ? rep.interior_centers : rep.interior_saddles);
    } else {
      ++(c.wall == 0 ? rep.wall_saddles_bottom : rep.wall_saddles_top);
    }
  }
  const int n = rep.interior_centers;
  if (rep.degenerate == 0 && n > 0) {
    if (rep.in_E && rep.interior_saddles == 0 && n % 2 == 0 && rep.wall_saddles_bottom == n &&
        rep.wall_saddles_top == n) {
      rep.kind = Pattern::Rolls;
      rep.cell_count = n;
    } else if (!rep.in_E && !rep.stability.wall_to_wall && rep.stability.interior_saddles_self_connected) {
      rep.kind = rep.mean_flow > 0.0 ? Pattern::CrossChannelEast : Pattern::CrossChannelWest;
      rep.cell_count = n;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::string render_svg(const SpectralState& s, const Grid& g, const PatternReport& rep, int width, int contours) {
  const double L = g.Lx();
  const int nx = 240, nz = std::max(16, static_cast<int>(nx / L));
  const double sx = width / L;
  const int height = std::max(80, static_cast<int>(std::lround(sx)));
  const double sz = static_cast<double>(height);
  std::vector<double> psi(static_cast<std::size_t>((nx + 1) * (nz + 1)));
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= nx; ++i)
    for (int m = 0; m <= nz; ++m) {
      const double v = evaluate(s, g, L * i / nx, static_cast<double>(m) / nz).psi;
      psi[static_cast<std::size_t>(i * (nz + 1) + m)] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  auto X = [&](double x) { return x * sx; };
  auto Y = [&](double z) { return sz * (1.0 - z); };
  if (hi > lo) {
    os << "<g stroke=\"#3060a0\" stroke-width=\"1\" fill=\"none\">\n";
    for (int c = 1; c <= contours; ++c) {
      const double lev = lo + (hi - lo) * c / (contours + 1);
      for (int i = 0; i < nx; ++i)
        for (int m = 0; m < nz; ++m) {
          const std::array<double, 4> v{psi[static_cast<std::size_t>(i * (nz + 1) + m)] - lev,
                                        psi[static_cast<std::size_t>((i + 1) * (nz + 1) + m)] - lev,
                                        psi[static_cast<std::size_t>((i + 1) * (nz + 1) + m + 1)] - lev,
                                        psi[static_cast<std::size_t>(i * (nz + 1) + m + 1)] - lev};
          const std::array<std::array<double, 2>, 4> xy{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
          std::vector<std::array<double, 2>> cut;
          for (int e = 0; e < 4; ++e) {
            const int f = (e + 1) % 4;
            if ((v[static_cast<std::size_t>(e)] > 0) != (v[static_cast<std::size_t>(f)] > 0)) {
              const double a = v[static_cast<std::size_t>(e)] /
                               (v[static_cast<std::size_t>(e)] - v[static_cast<std::size_t>(f)]);
              const auto& pe = xy[static_cast<std::size_t>(e)];
              const auto& pf = xy[static_cast<std::size_t>(f)];
              cut.push_back({(i + pe[0] + a * (pf[0] - pe[0])) * L / nx, (m + pe[1] + a * (pf[1] - pe[1])) / nz});
            }
          }
          for (std::size_t k = 0; k + 1 < cut.size(); k += 2)
            os << "<line x1=\"" << X(cut[k][0]) << "\" y1=\"" << Y(cut[k][1]) << "\" x2=\"" << X(cut[k + 1][0])
               << "\" y2=\"" << Y(cut[k + 1][1]) << "\"/>\n";
        }
    }
    os << "</g>\n";
  }
  for (const auto& c : rep.points) {
    const char* col = c.kind == PointKind::Center ? "#1a8f1a" : c.kind == PointKind::Saddle ? "#c02020" : "black";
    os << "<circle cx=\"" << X(c.x1) << "\" cy=\"" << Y(c.x2 - g.r0()) << "\" r=\"4\" fill=\"" << col << "\"/>\n";
  }
  os << "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\"13\">" << to_string(rep.kind)
     << " cells=" << rep.cell_count << " mean=" << std::setprecision(4) << std::scientific << rep.mean_flow
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace walker::topology
