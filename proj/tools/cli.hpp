#pragma once
// Command-line front end. Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <iosfwd>

namespace clipal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clipal::cli
