#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

#include "walker/verify.hpp"

// One line per criterion. Criteria with a runtime budget also fail when the
// budget is exceeded.
int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "all";
  const std::map<int, double> budget{{1, 1.0}, {2, 10.0}};
  int failed = 0;
  for (auto r : walker::verify::run_suite(suite, 1, 1)) {
    const auto b = budget.find(r.id);
    if (b != budget.end() && r.seconds > b->second) {
      r.pass = false;
      r.measured += "; over the " + std::to_string(static_cast<int>(b->second)) + " s budget";
    }
    std::printf("%s\n", walker::verify::line(r).c_str());
    failed += !r.pass;
  }
  std::printf("%s\n", failed == 0 ? "acceptance: all criteria passed" : "acceptance: FAILURES");
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
