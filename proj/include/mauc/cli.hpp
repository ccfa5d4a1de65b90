#pragma once

namespace mauc {

// Entry point of the `mauc` tool. Returns 0 on success, 1 on domain errors and
// 2 on usage errors; diagnostics go to stderr.
int run_cli(int argc, const char* const* argv);

} // namespace mauc
