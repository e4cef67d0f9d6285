#pragma once

#include "nehari/config_io.hpp"
#include "nehari/error.hpp"
#include "nehari/fibering.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nehari {

/// 0 success, 2 configuration, 3 projection or convergence, 4 nonnegativity, 1 other.
int exit_code_for(ErrorKind kind);

struct CommandResult {
    int exit_code = 0;
    nlohmann::ordered_json manifest;
};

/// Sobolev constant used for the thresholds: the configured value or S_N.
double sobolev_for(const ExperimentConfig& cfg);

/// lambda, resolving lambda_factor against Lambda_0 for the given weight norm.
double resolve_lambda(const ExperimentConfig& cfg, double f_norm);

/// Fibering report plus bifurcation table. With `triple` the scalars are taken
/// as given; otherwise they come from the seeded default field on the grid.
CommandResult cmd_fiber(const ExperimentConfig& cfg, const std::optional<FiberScalars>& triple,
                        const std::string& out_dir, std::ostream& log);

/// N+ solve, nonnegativity, bubble path and N- solve as requested by cfg.branch.
/// Writes manifest.json, field CSVs, profile.csv and timings.json.
CommandResult cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Re-runs cmd_solve from the config snapshot in a manifest file.
CommandResult cmd_solve_from_manifest(const std::string& manifest_path, const std::string& out_dir,
                                      std::ostream& log);

/// One row per lambda. Values are absolute, or multiples of Lambda_0 when `factors` is set.
CommandResult cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& lambdas, bool factors,
                        const std::string& out_dir, std::ostream& log);

/// Local and mixed quotients of normalized bubbles against S_N.
CommandResult cmd_sobolev(const ExperimentConfig& cfg, const std::vector<double>& epsilons,
                          const std::string& out_dir, std::ostream& log);

CommandResult cmd_validate(const ExperimentConfig& cfg, std::ostream& log);

void write_bifurcation_csv(std::ostream& os, const FiberScalars& sc, const ProblemParams& params,
                           const std::vector<double>& lambdas);

}  // namespace nehari
