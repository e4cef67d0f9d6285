#pragma once

#include "nehari/mixed_form.hpp"
#include "nehari/model_config.hpp"
#include "nehari/nehari_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nehari {

struct BubbleConfig {
    double epsilon = 0.2;
    std::optional<double> cutoff_radius;  // default: smallest half-width
    std::vector<double> center;
    double l0_max = 1e6;
    std::optional<double> b_exponent;     // when set, b = epsilon^q
    int profile_points = 30;
    double profile_max = 3.0;
};

/// A full experiment description. lambda_factor, when present, sets
/// lambda = lambda_factor * Lambda_0 once the grid is known.
struct ExperimentConfig {
    ProblemParams params;
    std::optional<double> lambda_factor;
    std::uint64_t seed = 1;
    std::string branch = "both";
    SolverTolerances tols;
    std::optional<double> sobolev_constant;  // default: closed-form S_N
    BubbleConfig bubble;
    MixedFormOptions forms;
    std::string cache_dir;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads NEHARI_<SECTION>_<KEY> from the process environment.
EnvLookup process_env();

/// Parses TOML text. Unknown sections or keys and missing required keys are
/// Config errors naming the key. Environment entries override file values.
ExperimentConfig parse_config(const std::string& text, const EnvLookup& env = process_env());
ExperimentConfig load_config(const std::string& path, const EnvLookup& env = process_env());

/// Documented keys per section, in a fixed order.
const std::vector<std::pair<std::string, std::vector<std::string>>>& config_schema();

nlohmann::ordered_json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Parses "nplus", "nminus" or "both".
void validate_branch(const std::string& branch);

}  // namespace nehari
