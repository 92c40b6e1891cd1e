#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace causalkit {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  /// An analysis failed or a reproduction missed a band.
  kExitAnalysisFailure = 1,
  /// Bad arguments or unreadable / malformed input.
  kExitUsage = 2,
};

/// Runs the `causalkit` command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causalkit
