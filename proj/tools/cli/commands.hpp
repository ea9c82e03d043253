#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bifl::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotConverged = 1,
  kExitConfigError = 2,
  kExitInvariantFailure = 3,
};

/// Runs the command line `args` (without the program name). Normal output
/// goes to out, log lines and diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bifl::cli
