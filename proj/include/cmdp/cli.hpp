#pragma once

#include "cmdp/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cmdp {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 2,
  kExitAssumption = 3,
  kExitValidation = 4,
  kExitNumerical = 5,
};

int exit_code_for(ErrorCode code);

/// Runs one command line (without the program name). Documents go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmdp
