#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "peq/config.hpp"

namespace peq {

enum class Subcommand { Simulate, Ensemble, Probe, Dimension, Verify };

std::optional<Subcommand> parse_subcommand(const std::string& name);

/// Exit status of a subcommand.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitError = 2 };

/// Runs one subcommand, writing its files under cfg.out_dir. `out` receives one JSON
/// summary line; on failure the line carries a "failures" list. `log` gets progress
/// and warnings.
int run_subcommand(Subcommand cmd, const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Initial state of a simulate run.
State simulate_initial_state(const RunConfig& cfg, const Grid& g);

}  // namespace peq
