#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfgp {

struct CheckResult {
  std::string name;
  double value = 0.0;      // observed deviation
  double tolerance = 0.0;
  bool passed = false;
};

/// Quick invariant checks run by `qfgp validate`.
std::vector<CheckResult> fast_invariant_suite();

/// Entry point of the qfgp command line tool. `args` excludes the program
/// name. Results go to files in the output directory, a JSON summary to
/// `out`, one JSON error record per line to `err`. Returns 0 iff no error
/// record was written.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfgp
