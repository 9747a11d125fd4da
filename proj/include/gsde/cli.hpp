#pragma once

#include <string>
#include <vector>

namespace gsde::cli {

/// Full CLI entry point (argv-style). Returns the process exit status:
/// 0 success, 2 config/parse error, 3 invariant or audit failure,
/// 4 numerical abort.
int run(const std::vector<std::string>& args);

} // namespace gsde::cli
