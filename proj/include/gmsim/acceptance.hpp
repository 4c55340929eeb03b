#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gmsim {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the built-in acceptance criteria. When `out` is given, one
/// `PASS`/`FAIL` line per criterion is written as soon as it finishes.
std::vector<CriterionResult> run_acceptance(std::ostream* out = nullptr);

}  // namespace gmsim
