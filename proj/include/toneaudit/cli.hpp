#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toneaudit {

/// Exit codes: 0 success, 1 pipeline failure, 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind the `toneaudit` binary. `args` excludes the program
/// name. Outputs are written atomically; on failure none are left behind.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toneaudit
