#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace omitlab::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_input = 2,     // invalid config, CSV or flags
    exit_physics = 3,   // unstable operating point
    exit_numerical = 4, // non-convergence, or oracle deviation >= 1e-3
};

// Runs the command line (without the program name). All output goes to the
// given streams so that tests can drive the CLI in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace omitlab::cli
