#pragma once

#include "heatgate/cli/config.hpp"
#include "heatgate/gates.hpp"

#include <filesystem>
#include <ostream>

namespace heatgate::cli {

enum ExitCode : int { ok = 0, solver_failure = 1, invalid_config = 2, table_mismatch = 3 };

// Snapshots, convergence.csv and manifest.cfg for one finished run.
void write_run_artifacts(const std::filesystem::path& dir, const RunConfig& config, const RunTrace& trace,
                         const ReadoutResult& readout);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_truth_table(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses the command line and dispatches to a subcommand. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace heatgate::cli
