#pragma once

#include <ostream>

namespace lipext {

/// Entry point of the `lipext` tool. Exit status: 0 success or satisfied,
/// 2 a negative mathematical finding, 1 an error.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lipext
