#pragma once

// Streamline topology of a computed state: stagnation points of the stream
// function, separatrix tracing along its level sets, and the roll /
// cross-channel classification.

#include <string>
#include <vector>

#include "walker/field.hpp"

namespace walker::topology {

enum class PointKind { Center, Saddle, Degenerate };
std::string to_string(PointKind k);

struct CriticalPointInfo {
  double x1 = 0.0;
  double x2 = 0.0;
  PointKind kind = PointKind::Degenerate;
  bool on_boundary = false;
  int wall = -1;  ///< 0 bottom, 1 top, -1 interior
  double stream = 0.0;
  /// Hessian determinant (interior) or d^2 psi / dx1 dx2 (boundary)
  double indicator = 0.0;
};

struct TopologyOptions {
  int seeds_x = 0;  ///< 0: 12 per retained wavenumber, at least 32
  int seeds_z = 12;
  double degenerate_tol = 1e-8;  ///< relative to the largest second derivative squared
  double dedup = 1e-6;
  double in_E_tol = 1e-8;
  double connect_tol = 1e-4;
  double trace_step = 2e-3;
};

/// Interior points from Newton on grad psi = 0 seeded on a grid; wall points
/// from the zeros of u1 along each wall. Sorted by (wall, x1, x2).
std::vector<CriticalPointInfo> find_critical_points(const SpectralState& s, const Grid& g,
                                                    const TopologyOptions& opt = {});

struct Trace {
  int from = -1;
  int ray = 0;
  std::string end;  ///< "saddle", "wall", "limit"
  int to = -1;      ///< index of the saddle reached, when any
  double distance = 0.0;  ///< closest approach to `to`
  double x1_end = 0.0, x2_end = 0.0;
  double length = 0.0;
  double level_drift = 0.0;
};

struct StabilityReport {
  bool regular = true;
  bool wall_to_wall = false;
  bool interior_saddles_self_connected = true;
  bool in_Htilde = false;
  bool stable_in_H = false;
  bool stable_in_Htilde = false;
  std::vector<Trace> traces;
  std::vector<std::string> notes;
};

/// Traces every saddle separatrix on the level set of its stream value.
StabilityReport structural_stability_check(const SpectralState& s, const Grid& g,
                                           const std::vector<CriticalPointInfo>& points,
                                           const TopologyOptions& opt = {});

enum class Pattern { Rolls, CrossChannelEast, CrossChannelWest, Degenerate };
std::string to_string(Pattern p);

struct PatternReport {
  Pattern kind = Pattern::Degenerate;
  int cell_count = 0;
  double mean_flow = 0.0;
  bool in_E = false;
  std::vector<CriticalPointInfo> points;
  bool structurally_stable_in_Htilde = false;
  StabilityReport stability;
  int interior_centers = 0;
  int interior_saddles = 0;
  int wall_saddles_bottom = 0;
  int wall_saddles_top = 0;
  int degenerate = 0;
};

PatternReport classify_pattern(const SpectralState& s, const Grid& g, const TopologyOptions& opt = {});

/// Stream-function contours with the critical points marked.
std::string render_svg(const SpectralState& s, const Grid& g, const PatternReport& rep, int width = 900,
                       int contours = 24);

}  // namespace walker::topology
