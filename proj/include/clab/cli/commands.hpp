#pragma once

#include <ostream>

#include "clab/consistency/visibility.hpp"

namespace clab::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kViolated = 1,     // check: the history does not satisfy the model
  kBadInput = 2,     // config, history, argument or bound errors
  kInvariant = 3,    // a protocol invariant failed during a run
};

/// Entry point shared by the binary and the tests. Reads
/// CONSISTENCY_LAB_SEED, which replaces the configured seed.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Trace text format, one version per line:
//
//   version <id> key <key> value <value> creator <dc>.<partition> created <us>
//       deps <id,id,...|-> visible <us|-> <us|-> ...
//
// followed by one line per key and surviving replica:
//
//   head <key> <dc>.<partition> <id,id,...|->
void write_trace(std::ostream& out, const consistency::VisibilityTrace& trace);

}  // namespace clab::cli
