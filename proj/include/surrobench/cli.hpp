#pragma once

#include <ostream>

namespace surrobench {

/// Entry point of the `surrobench` tool. Results go to `out` as JSON,
/// diagnostics and usage text to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace surrobench
