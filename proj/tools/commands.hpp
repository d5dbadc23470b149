#pragma once

#include <ostream>

namespace gin::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kRuntimeFailure = 2 };

// Full command line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Runs the built-in invariant checks; returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace gin::cli
