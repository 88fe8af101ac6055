#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chorate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNoInput = 66;
inline constexpr int kExitCantCreate = 73;

/// Runs the command line (args excludes the program name). Results go to `out`
/// unless an --out file is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chorate::cli
