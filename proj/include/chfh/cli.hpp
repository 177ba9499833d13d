#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chfh {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Command-line entry point. args[0] is the program name; the first
/// positional argument selects simulate, steady, uniqueness, lab or check.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chfh
