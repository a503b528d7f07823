#pragma once

#include <ostream>

namespace sisapprox {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitSuccess = 0,
    kExitVerificationFailed = 1,
    kExitUsage = 2,
};

/// Runs one sisapprox command line. Normal output goes to `out`,
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sisapprox
