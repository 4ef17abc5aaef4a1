#pragma once

// The concdiam command-line front end, as a library so tests can drive it.

#include <ostream>
#include <string>
#include <vector>

namespace concdiam::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kCertificationFailed = 2 };

/// Runs one command. `args` excludes the program name. Results go to `out`,
/// diagnostics and one-line error messages to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace concdiam::cli
