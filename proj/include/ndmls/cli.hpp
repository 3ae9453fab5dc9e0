#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ndmls {

enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitInvalidConfig = 2 };

/// Entry point of the `ndmls` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ndmls
