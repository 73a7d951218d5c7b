#pragma once

#include <iosfwd>

namespace motdual::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kSolveFailed = 2;

// Runs one command line. Reports go to files named by --out (or to `out`
// when absent); messages go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace motdual::cli
