#pragma once

// Acceptance checks, grouped in suites. The measured values of a check are
// a deterministic function of the seed; timing is kept apart from them.

#include <cstdint>
#include <string>
#include <vector>

#include "walker/io.hpp"

namespace walker::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string suite;
  bool pass = false;
  std::string measured;
  double seconds = 0.0;
};

/// linstab, transition, dynamics, topology, continuation, determinism, all
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);
/// Criteria of a suite; throws ConfigError for an unknown name.
std::vector<int> suite_criteria(const std::string& name);

inline constexpr int kCriteria = 14;

/// One check; an exception inside it becomes a failed result.
CriterionResult run_criterion(int id, std::uint64_t seed = 1);

/// Runs the criteria of a suite on `threads` workers, results in id order.
/// Criterion 14 reruns checks 1..13 and compares their JSON byte for byte.
std::vector<CriterionResult> run_suite(const std::string& name, int threads = 1, std::uint64_t seed = 1);

/// Machine-readable summary without timing.
io::json to_json(const std::vector<CriterionResult>& results);
io::json timing_json(const std::vector<CriterionResult>& results);
/// "[PASS] 3 multiplicity and PES: ..." text line.
std::string line(const CriterionResult& r);

}  // namespace walker::verify
