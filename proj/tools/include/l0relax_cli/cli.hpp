#pragma once

// Command-line front end. `run` does all the work so tests can drive it
// in-process.

#include <ostream>
#include <string>
#include <vector>

namespace l0relax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

/// args[0] is the program name. JSON goes to `out`, the human summary and
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace l0relax::cli
