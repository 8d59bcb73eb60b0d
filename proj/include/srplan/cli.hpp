#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace srplan::cli {

/// Exit-code contract.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,      // missing/unreadable/malformed input files
  kBadFlags = 2,     // command-line errors
  kValidation = 3,   // inputs that break domain invariants
  kNoFeasible = 4,   // search/report found no design within eps_max
};

/// Runs one CLI invocation. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srplan::cli
