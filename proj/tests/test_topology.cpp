#include <cmath>

#include "doctest.h"
#include "walker/topology.hpp"

using namespace walker;
using namespace walker::topology;

namespace {

SpectralState e0(const Grid& g, int k, double amp) {
  SpectralState s(g);
  s.psi(k, 1) = 0.5 * amp;
  return s;
}

}  // namespace

TEST_CASE("e0 census") {
  const Grid g(1.0, 24, 8);
  for (int k : {1, 2, 3}) {
    CAPTURE(k);
    const auto pts = find_critical_points(e0(g, k, 1.0), g);
    int centers = 0, wall = 0, other = 0;
    for (const auto& p : pts) {
      if (p.kind == PointKind::Center && !p.on_boundary) {
        ++centers;
        CHECK(std::abs(p.x2 - 1.5) < 1e-10);
      } else if (p.kind == PointKind::Saddle && p.on_boundary) {
        ++wall;
        CHECK(std::abs(std::cos(k * p.x1)) < 1e-10);
      } else {
        ++other;
      }
    }
    CHECK(centers == 2 * k);
    CHECK(wall == 4 * k);
    CHECK(other == 0);
  }
}

TEST_CASE("e0 rolls and their structural stability") {
  const Grid g(1.0, 24, 8);
  for (int k : {1, 2, 3}) {
    const PatternReport r = classify_pattern(e0(g, k, 0.7), g);
    CHECK(r.kind == Pattern::Rolls);
    CHECK(r.cell_count == 2 * k);
    CHECK(r.in_E);
    CHECK(r.stability.regular);
    CHECK(r.stability.wall_to_wall);
    CHECK_FALSE(r.stability.stable_in_H);
    CHECK(r.stability.stable_in_Htilde);
    CHECK(r.structurally_stable_in_Htilde);
  }
}

TEST_CASE("cross-channel flows") {
  const Grid g(1.0, 24, 8);
  for (double c : {-1.5, 1.5}) {
    SpectralState s = e0(g, 2, 1.0);
    s.mean(0) = c;
    const PatternReport r = classify_pattern(s, g);
    CHECK(r.kind == (c < 0 ? Pattern::CrossChannelWest : Pattern::CrossChannelEast));
    CHECK(r.cell_count == 4);
    CHECK_FALSE(r.in_E);
    CHECK_FALSE(r.stability.wall_to_wall);
    CHECK(r.stability.interior_saddles_self_connected);
    CHECK(r.stability.stable_in_H);
    CHECK_FALSE(r.stability.stable_in_Htilde);
    CHECK(r.mean_flow == doctest::Approx(c).epsilon(1e-12));
  }
  SUBCASE("strong through-flow removes the cells") {
    SpectralState s = e0(g, 2, 1.0);
    s.mean(0) = 10.0;
    const PatternReport r = classify_pattern(s, g);
    CHECK(r.points.empty());
    CHECK(r.kind == Pattern::Degenerate);
  }
}

TEST_CASE("parallel flow") {
  const Grid g(1.0, 12, 6);
  SpectralState s(g);
  s.mean(0) = 0.3;
  CHECK(find_critical_points(s, g).empty());
  const PatternReport r = classify_pattern(s, g);
  CHECK(r.stability.regular);
  CHECK(r.stability.traces.empty());
  CHECK(r.kind == Pattern::Degenerate);
}

TEST_CASE("interior saddles") {
  const Grid g(1.0, 24, 8);
  SUBCASE("homoclinic loops around the periodic direction") {
    // psi = (1 + 0.5 cos x) sin(pi z)
    SpectralState s(g);
    s.mean(1) = kPi;
    s.psi(1, 1) = 0.25;
    const auto pts = find_critical_points(s, g);
    int saddles = 0;
    for (const auto& p : pts) saddles += p.kind == PointKind::Saddle && !p.on_boundary;
    CHECK(saddles == 1);
    const StabilityReport st = structural_stability_check(s, g, pts);
    CHECK(st.regular);
    CHECK(st.interior_saddles_self_connected);
    CHECK(st.stable_in_Htilde);
    for (const auto& t : st.traces) CHECK(t.level_drift < 1e-8);
  }
  SUBCASE("stacked cells connect distinct saddles") {
    // psi = cos x sin(2 pi z)
    SpectralState s(g);
    s.psi(1, 2) = 0.5;
    const auto pts = find_critical_points(s, g);
    int saddles = 0;
    for (const auto& p : pts) saddles += p.kind == PointKind::Saddle && !p.on_boundary;
    CHECK(saddles == 2);
    const StabilityReport st = structural_stability_check(s, g, pts);
    CHECK_FALSE(st.interior_saddles_self_connected);
    CHECK_FALSE(st.stable_in_Htilde);
    CHECK(classify_pattern(s, g).kind == Pattern::Degenerate);
  }
}

TEST_CASE("classification is translation invariant") {
  const Grid g(1.0, 24, 8);
  SpectralState s = e0(g, 2, 1.0);
  s.psi(4, 1) = 0.05;
  s.theta(2, 1) = 0.3;
  for (double dx : {0.1, 0.77, 2.5}) {
    const PatternReport a = classify_pattern(s, g);
    const PatternReport b = classify_pattern(shift(s, g, dx), g);
    CHECK(a.kind == b.kind);
    CHECK(a.cell_count == b.cell_count);
    CHECK(a.points.size() == b.points.size());
  }
}

TEST_CASE("mean flow is the vertical integral") {
  const Grid g(1.0, 12, 6);
  std::mt19937_64 rng(3);
  const SpectralState s = random_state(g, rng, 0.5, g.K());
  CHECK(std::abs(classify_pattern(s, g).mean_flow - vertical_integral_u1(s)) < 1e-12);
}

TEST_CASE("svg rendering") {
  const Grid g(1.0, 24, 8);
  const SpectralState s = e0(g, 2, 1.0);
  const std::string svg = render_svg(s, g, classify_pattern(s, g));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<line") != std::string::npos);
  CHECK(svg.find("Rolls") != std::string::npos);
}
