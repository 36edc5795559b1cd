#pragma once

#include <ostream>

namespace dfm::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kFileNotFound = 3,
  kParseFailure = 4,
  kValidationFailure = 5,
  kInfeasibleStart = 6,
  kSolverFailure = 7,
};

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfm::cli
