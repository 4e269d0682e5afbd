#pragma once

#include <iosfwd>

namespace cpsc::cli {

/// Entry point behind the `cpsc` executable. Returns the process exit code:
/// 0 success, 1 configuration error, 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpsc::cli
