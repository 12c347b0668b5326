#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace palmdpp {

/// Runs the command line tool on `args` (without the program name). Returns
/// the process exit code: 0 success, 1 a statistical verdict failed, 2 config,
/// precondition, IO or usage error, 3 numerical error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace palmdpp
