#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cavidyn::cli {

/// Runs one CLI invocation (args excludes the program name). Writes data to
/// `out` (or the --out path when given) and diagnostics to `err`.
/// Exit codes: 0 ok, 1 domain error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string fmt17(double v);

} // namespace cavidyn::cli
