// Acceptance suite: numbered, self-contained criteria covering the library's
// headline properties, each printing a single pass/fail line with its
// measured values.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace peflow {

enum class VerifyLevel { fast, full };

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values backing the verdict
  double seconds = 0.0;
};

struct VerifySummary {
  std::vector<CriterionResult> results;
  int failures = 0;
};

// Runs the criteria tagged for the level (fast: 1-7 and 12; full: all 13),
// streaming one line per criterion to `out`. Never throws on a failing
// criterion: failures are results.
VerifySummary verify_suite(VerifyLevel level, std::ostream& out);

}  // namespace peflow
