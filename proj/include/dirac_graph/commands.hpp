#pragma once

#include <iosfwd>

#include "dirac_graph/config.hpp"

namespace dgraph {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_hypothesis = 3,
  exit_solver = 4,
  exit_verification = 5,
};

/// Each command writes into config.out and returns an ExitCode. Library
/// exceptions propagate; run_cli maps them to exit codes.
int cmd_bands(const RunConfig& config, std::ostream& log);
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

/// dirac-graph <bands|solve|verify> --config path [--deflate k] [--out dir] [--seed n]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dgraph
