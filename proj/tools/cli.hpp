#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stateid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInput = 2;

/// args excludes the program name. The report goes to --out when given,
/// otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stateid::cli
