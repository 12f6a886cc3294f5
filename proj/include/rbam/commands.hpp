#pragma once

#include "rbam/fem_core.hpp"
#include "rbam/rb_offline.hpp"
#include "rbam/run_config.hpp"

#include <exception>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rbam {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitMissingArtifact = 3,
    kExitSolver = 4,
    kExitSaturation = 5,
};

/// Maps an exception to its exit code.
int exit_code_for(const std::exception& e);

/// Runs fn; on an exception writes a one-line JSON error record to err and returns its exit code.
int run_command(const std::function<void()>& fn, std::ostream& err);

/// Truth trajectory at mu: truth_trajectory.csv and truth_summary.json in the output directory.
void cmd_truth(const RunConfig& config, const ParameterVector& mu, std::ostream& log);

/// Training set, snapshots, both greedy loops, model file and the diagnostics CSVs.
void cmd_offline(const RunConfig& config, std::ostream& log);

struct OnlineOptions {
    ParameterVector mu;
    bool compare = false;
};

/// Reduced trajectory from a saved model, optionally overlaid with the truth trajectory.
void cmd_online(const RunConfig& config, const OnlineOptions& options, std::ostream& log);

/// One model per budget on a shared training set, evaluated on the test set.
void cmd_study(const RunConfig& config, const std::vector<BasisBudget>& budgets, std::ostream& log);

/// Loads the model file and re-runs all its invariant checks.
void cmd_validate(const RunConfig& config, std::ostream& log);

/// Parses "4:4,8:8,16:16".
std::vector<BasisBudget> parse_budgets(const std::string& text);

/// Gnuplot script that plots the artifacts of one subcommand.
std::string gnuplot_script(const std::string& command, const RunConfig& config);

}  // namespace rbam
