#pragma once

#include <iosfwd>

namespace jointdec::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 success, 1 input/validation error, 2 usage error.
// Paths given as "-" map to `in` / `out`.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace jointdec::cli
