#pragma once

#include <ostream>

namespace echelon::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

// Parses argv, dispatches to the harness and maps failures onto exit codes.
// All user-facing text goes to `out` (results) and `err` (progress, errors).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace echelon::cli
