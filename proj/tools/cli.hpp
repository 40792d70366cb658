#pragma once

#include <iosfwd>

namespace vgs::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 invalid input or
// configuration, 3 I/O failure, 4 corrupt data file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vgs::cli
