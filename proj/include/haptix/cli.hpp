#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace haptix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command line (args excludes the program name). Reports go to
/// files under --out; the summary line goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace haptix::cli
