#pragma once

namespace sparsevine {

//! Exit codes of the command-line tool.
enum ExitCode
{
  exit_ok = 0,
  exit_numerical = 2,
  exit_usage = 64
};

//! Entry point of the `sparsevine` tool: fit, predict, simulate,
//! extract-features, evaluate.
int run_cli(int argc, char** argv);

} // namespace sparsevine
