#pragma once

// Subcommands behind the bohmlab executable. Each writes CSV tables and a JSON
// summary into the output directory and returns the summary.

#include "bohm/scenario.hpp"

#include <filesystem>
#include <iosfwd>

namespace bohm {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::size_t threads = 1;
};

/// Ensembles for every schedule row: paths_row<i>.csv, positions_row<i>.csv, simulate.json.
nlohmann::json cmd_simulate(const Scenario& scenario, const RunOptions& options);
/// Bound terms per schedule row: flux_table.csv, flux.json.
nlohmann::json cmd_flux(const Scenario& scenario, const RunOptions& options);
/// CDF transport map on a q0 grid (1D models only): transport.csv, transport.json.
nlohmann::json cmd_transport(const Scenario& scenario, const RunOptions& options);
/// Merges simulate.json and flux.json into report.json and report.csv.
nlohmann::json cmd_report(const Scenario& scenario, const RunOptions& options);

/// 2 for validation, input and applicability errors, 3 for numerical failures.
int exit_code(ErrorCode code);

/// Full command line: subcommand, --scenario, --out, --threads, --override.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bohm
