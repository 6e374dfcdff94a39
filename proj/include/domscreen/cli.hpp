#pragma once

#include <iosfwd>

namespace domscreen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitInternal = 3;

/// Entry point of the `domscreen` executable. Data goes to files or `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace domscreen
