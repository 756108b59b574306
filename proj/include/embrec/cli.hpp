#pragma once

namespace embrec {

/// Parses argv and runs one pipeline invocation (train, evaluate,
/// recommend, similar, or export). Returns the process exit code:
/// 0 on success, 1 on data/runtime errors, 2 on usage errors. Diagnostics
/// go to stderr; stdout carries only the documented machine-readable
/// payload of the subcommand.
int run_cli(int argc, const char* const* argv);

}  // namespace embrec
