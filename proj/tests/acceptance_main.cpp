// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <iostream>

#include "gmsim/acceptance.hpp"

int main() {
  const auto results = gmsim::run_acceptance(&std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (static_cast<int>(results.size()) - failed) << "/" << results.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
