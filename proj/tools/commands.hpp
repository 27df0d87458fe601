#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bnuq::cli {

// `args` excludes the program name. Returns the process exit status:
// 0 on success, 1 on a library error, 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnuq::cli
