#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orec {

enum ExitCode : int {
  kExitOk = 0,
  kExitBadInput = 1,  ///< malformed config, method or field file
  kExitRegime = 2,    ///< spec outside every closed-form regime
  kExitCheckFailed = 3,
};

/// Runs the command line (args excludes the program name). Reports go to
/// `out` unless an output path is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orec
