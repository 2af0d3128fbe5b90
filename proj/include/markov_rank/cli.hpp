#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "markov_rank/chain_core.hpp"

namespace markov_rank::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kParse = 1,
  kStructure = 2,
  kDegenerate = 3,
  kConvergence = 4,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "uniform", "e:k" (1-based), "file:PATH", or an inline comma-separated vector.
Distributiond parse_init(const std::string& spec, Index n);

/// Comma-separated 1-based states.
Hole parse_hole(const std::string& spec, Index n);

}  // namespace markov_rank::cli
