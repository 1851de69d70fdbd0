#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace revox::cli {

/// Runs one `revox` invocation. `args` excludes the program name. Returns the
/// process exit code; diagnostics go to `err`, reports to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace revox::cli
