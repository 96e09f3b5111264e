#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "despeck/patch.hpp"
#include "despeck/solver.hpp"

namespace despeck {

// Flat run configuration mirroring the key = value config file format.
// tau is configured as the ratio tau/beta, key `tau_over_beta`.
struct RunConfig {
    enum class Algorithm { fixed, practical };

    Algorithm algorithm = Algorithm::practical;
    int looks = 3;
    std::uint64_t seed = 0;

    double tau_over_beta = 1.0 / 150.0;
    double lambda = 1.3;
    double mu = 1.0;
    double rho = 1.5;
    double gamma = 1.9;
    double epsilon = 1e-10;

    double alpha = 1e-3;
    double beta = 1.001;
    int max_iters = 24;
    double rel_tol = 0.0;

    int search_window_side = 50;
    int patch_side = 9;
    int patches_per_group = 120;
    int reference_stride = 4;

    bool center = true;
    int threads = 0;
};

// Named presets: L{1,3,5}-{standard,remote}. The model, block-matching and
// iteration values depend on the algorithm the preset is applied to.
RunConfig preset_config(const std::string& name, RunConfig::Algorithm algorithm);
std::vector<std::string> preset_names();

// Applies `key = value` lines (with # comments) from a file on top of base.
// Unknown keys and malformed values raise ConfigError naming the key.
RunConfig parse_config_file(const std::string& path, const RunConfig& base);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// Serialization that parse_config_file reads back to an identical config.
std::string serialize_config(const RunConfig& cfg);

// Positivity/ordering validation; throws ConfigError naming the offending
// key. Returns human-readable warnings (e.g. loss of strict convexity).
std::vector<std::string> validate_config(const RunConfig& cfg);

ModelParams model_params(const RunConfig& cfg);
AlgoParams algo_params(const RunConfig& cfg);
BlockMatchConfig match_config(const RunConfig& cfg);
SolverOptions solver_options(const RunConfig& cfg);

} // namespace despeck
