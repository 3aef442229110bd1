#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aipi {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on data or validation errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aipi
