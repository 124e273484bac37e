// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace pckrig::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

/// Parses the command line and runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pckrig::cli
