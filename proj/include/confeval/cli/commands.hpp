#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitRuntimeFailure = 3;

/// Entry point shared by the executable and the tests. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confeval::cli
