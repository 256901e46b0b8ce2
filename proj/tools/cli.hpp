#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corrdet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one command line (without the program name). Messages go to `out`
/// and `err`; the result is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corrdet
