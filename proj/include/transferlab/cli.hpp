#pragma once

#include <ostream>

namespace transferlab {

// Exit codes: 0 success, 2 build/config error, 3 unknown id, 4 internal consistency failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace transferlab
