#pragma once

#include <ostream>

namespace hivqe {

/// Entry point behind the `hivqe` executable. Subcommands: run, fci, sweep,
/// report. Returns the process exit code; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hivqe
