#pragma once

#include <iosfwd>
#include <string>

#include "relent/config.hpp"

namespace relent {

/// Runs the configured experiment, writes ledgers, stats, tables, checkpoints
/// and a gnuplot script under a deterministic run directory, prints verdict
/// lines to `out`, and returns the process exit code:
///   0 pass, 2 inequality-verdict fail (numerical failures and usage errors
///   are raised as exceptions and mapped to 3 and 1 by the CLI).
int dispatch(const RunConfig& cfg, std::ostream& out);

/// Run directory for a configuration: <output_dir>/<kind>-<hash16>.
std::string run_directory(const RunConfig& cfg);

}  // namespace relent
