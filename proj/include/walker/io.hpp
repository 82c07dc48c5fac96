#pragma once

// Artifact formats: snapshot and table CSV, coefficient and report JSON.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "walker/continuation.hpp"
#include "walker/dynamics.hpp"
#include "walker/forcing.hpp"
#include "walker/linstab.hpp"
#include "walker/topology.hpp"
#include "walker/transition.hpp"

namespace walker::io {

using json = nlohmann::ordered_json;

/// Header x1,x2,u1,u2,T,psi; nx columns in x1 and nz + 1 rows from wall to
/// wall. T includes the lift of `f` when given. nx = 0 picks 2 Nx.
std::string snapshot_csv(const SpectralState& s, const Grid& g, const ForcingProfile* f = nullptr, int nx = 0,
                         int nz = 24);

/// {"grid": .., "time": .., "psi": {"k,j": [re, im]}, "theta": {..}, "mean": {"0,j": c}}
json coefficients_json(const SpectralState& s, const Grid& g);
/// Inverse of coefficients_json. Throws ConfigError on malformed input.
SpectralState coefficients_from_json(const json& j, const Grid& g);

/// k, j, R for k in 1..kmax, j in 1..jmax.
std::string marginal_csv(const NondimParams& p, int kmax, int jmax);

/// s, R, amplitude, index, leading_re, leading_im
std::string branch_csv(const continuation::Branch& br);
json branch_events_json(const continuation::Branch& br, const std::optional<continuation::HopfPoint>& hopf);

json to_json(const NondimParams& p);
json to_json(const linstab::CriticalPoint0& c);
json to_json(const transition::TransitionReport& r);
json to_json(const transition::TransitionNumber& t);
json to_json(const topology::PatternReport& r);

/// Writes via a temporary file and rename.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace walker::io
