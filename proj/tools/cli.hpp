#pragma once

#include <iosfwd>

namespace lsr::cli {

/// Exit codes of the `lsr` command.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,  ///< bad flags, unknown subcommand, invalid configuration
    kData = 2,   ///< missing or malformed input files
};

/// Runs one `lsr` invocation. Results go to `out` (or to files named by
/// flags), diagnostics to `err`.
int run_command(int argc, char const *const *argv, std::ostream &out, std::ostream &err);

}  // namespace lsr::cli
