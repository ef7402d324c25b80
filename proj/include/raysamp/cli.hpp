#pragma once

#include <iosfwd>
#include <string>

namespace raysamp {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3 };

/// Runs the raysamp command line (subcommands probmap, render-gt, train, eval, compare).
/// Normal output goes to `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Git blob identifier of a byte string: sha1("blob <size>\0" + bytes), lowercase hex.
std::string git_blob_sha1(const std::string& bytes);

}  // namespace raysamp
