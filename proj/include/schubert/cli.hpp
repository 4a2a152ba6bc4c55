#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace schubert::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2 };

/// Parses `args` (without the program name) and dispatches to a subcommand.
/// Primary output goes to `out`, usage text and errors to `err`, logs to stderr.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace schubert::cli
