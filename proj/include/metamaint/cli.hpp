#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace metamaint::cli {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a user error and 2 on an internal error; messages go to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace metamaint::cli
