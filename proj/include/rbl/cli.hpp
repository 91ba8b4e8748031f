#pragma once

#include <iosfwd>

namespace rbl {

// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitInsufficient = 2,
    kExitViolated = 3,
};

// Parses and runs one command. Machine-readable output goes to `out`,
// human-readable summaries and errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rbl
