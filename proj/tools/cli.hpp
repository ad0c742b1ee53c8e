#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hhash::cli {

/// Runs one invocation of the hhash tool. `args` excludes the program name.
/// Returns the process exit status (0 on success, 1 on any error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hhash::cli
