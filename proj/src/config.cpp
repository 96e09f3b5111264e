#include "despeck/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace despeck {

namespace {

struct PresetRow {
    int looks;
    bool remote;
    // block matching
    int window, patch, patches;
    // model, per algorithm
    double tau_over_beta_fixed, lambda_fixed;
    double tau_over_beta_practical, lambda_practical;
    // common
    double rho, gamma;
    int iters_practical;
};

// Per-look settings for standard and remote imagery.
constexpr PresetRow kPresets[] = {
    {1, false, 50, 10, 150, 1.0 / 50.0, 1.8, 1.0 / 50.0, 2.6, 0.01, 4.0, 68},
    {3, false, 50, 9, 120, 1.0 / 150.0, 1.0, 1.0 / 150.0, 1.3, 1.5, 1.9, 24},
    {5, false, 50, 8, 100, 1.0 / 250.0, 0.6, 1.0 / 250.0, 0.8, 2.0, 1.3, 19},
    {1, true, 50, 10, 150, 1.0 / 100.0, 1.0, 1.0 / 50.0, 2.6, 0.01, 4.0, 68},
    {3, true, 50, 9, 120, 1.0 / 150.0, 0.45, 1.0 / 150.0, 1.2, 1.5, 1.9, 24},
    {5, true, 50, 8, 100, 1.0 / 200.0, 0.15, 1.0 / 250.0, 0.7, 2.0, 1.3, 19},
};

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
    std::istringstream in(v);
    T out{};
    if (!(in >> out) || !(in >> std::ws).eof())
        throw ConfigError("config key '" + key + "': invalid value '" + v + "'");
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

RunConfig preset_config(const std::string& name, RunConfig::Algorithm algorithm) {
    for (const auto& row : kPresets) {
        const std::string rowname =
            "L" + std::to_string(row.looks) + (row.remote ? "-remote" : "-standard");
        if (rowname != name) continue;

        RunConfig cfg;
        cfg.algorithm = algorithm;
        cfg.looks = row.looks;
        cfg.search_window_side = row.window;
        cfg.patch_side = row.patch;
        cfg.patches_per_group = row.patches;
        cfg.reference_stride = row.patch / 2;
        cfg.mu = 1.0;
        cfg.rho = row.rho;
        cfg.gamma = row.gamma;
        cfg.epsilon = 1e-10;
        cfg.beta = 1.001;
        cfg.alpha = 1e-3;
        if (algorithm == RunConfig::Algorithm::practical) {
            cfg.tau_over_beta = row.tau_over_beta_practical;
            cfg.lambda = row.lambda_practical;
            cfg.max_iters = row.iters_practical;
            cfg.rel_tol = 0.0;
            cfg.center = true;
        } else {
            cfg.tau_over_beta = row.tau_over_beta_fixed;
            cfg.lambda = row.lambda_fixed;
            cfg.max_iters = 30;
            cfg.rel_tol = 1e-3;
            cfg.center = false;
        }
        return cfg;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& row : kPresets)
        names.push_back("L" + std::to_string(row.looks) + (row.remote ? "-remote" : "-standard"));
    return names;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "algorithm") {
        if (value == "fixed")
            cfg.algorithm = RunConfig::Algorithm::fixed;
        else if (value == "practical")
            cfg.algorithm = RunConfig::Algorithm::practical;
        else
            throw ConfigError("config key 'algorithm': expected fixed or practical");
    } else if (key == "looks") {
        cfg.looks = parse_number<int>(value, key);
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "tau_over_beta") {
        cfg.tau_over_beta = parse_number<double>(value, key);
    } else if (key == "lambda") {
        cfg.lambda = parse_number<double>(value, key);
    } else if (key == "mu") {
        cfg.mu = parse_number<double>(value, key);
    } else if (key == "rho") {
        cfg.rho = parse_number<double>(value, key);
    } else if (key == "gamma") {
        cfg.gamma = parse_number<double>(value, key);
    } else if (key == "epsilon") {
        cfg.epsilon = parse_number<double>(value, key);
    } else if (key == "alpha") {
        cfg.alpha = parse_number<double>(value, key);
    } else if (key == "beta") {
        cfg.beta = parse_number<double>(value, key);
    } else if (key == "max_iters") {
        cfg.max_iters = parse_number<int>(value, key);
    } else if (key == "rel_tol") {
        cfg.rel_tol = parse_number<double>(value, key);
    } else if (key == "search_window_side") {
        cfg.search_window_side = parse_number<int>(value, key);
    } else if (key == "patch_side") {
        cfg.patch_side = parse_number<int>(value, key);
    } else if (key == "patches_per_group") {
        cfg.patches_per_group = parse_number<int>(value, key);
    } else if (key == "reference_stride") {
        cfg.reference_stride = parse_number<int>(value, key);
    } else if (key == "center") {
        cfg.center = parse_bool(value, key);
    } else if (key == "threads") {
        cfg.threads = parse_number<int>(value, key);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    RunConfig cfg = base;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_config_entry(cfg, trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "algorithm = "
        << (cfg.algorithm == RunConfig::Algorithm::fixed ? "fixed" : "practical") << "\n";
    out << "looks = " << cfg.looks << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "tau_over_beta = " << cfg.tau_over_beta << "\n";
    out << "lambda = " << cfg.lambda << "\n";
    out << "mu = " << cfg.mu << "\n";
    out << "rho = " << cfg.rho << "\n";
    out << "gamma = " << cfg.gamma << "\n";
    out << "epsilon = " << cfg.epsilon << "\n";
    out << "alpha = " << cfg.alpha << "\n";
    out << "beta = " << cfg.beta << "\n";
    out << "max_iters = " << cfg.max_iters << "\n";
    out << "rel_tol = " << cfg.rel_tol << "\n";
    out << "search_window_side = " << cfg.search_window_side << "\n";
    out << "patch_side = " << cfg.patch_side << "\n";
    out << "patches_per_group = " << cfg.patches_per_group << "\n";
    out << "reference_stride = " << cfg.reference_stride << "\n";
    out << "center = " << (cfg.center ? 1 : 0) << "\n";
    out << "threads = " << cfg.threads << "\n";
    return out.str();
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
    const auto positive = [](double v, const char* key) {
        if (!(v > 0.0)) throw ConfigError(std::string("config key '") + key + "' must be positive");
    };
    if (cfg.looks < 1) throw ConfigError("config key 'looks' must be >= 1");
    positive(cfg.tau_over_beta, "tau_over_beta");
    positive(cfg.lambda, "lambda");
    positive(cfg.mu, "mu");
    if (cfg.rho < 0.0) throw ConfigError("config key 'rho' must be nonnegative");
    if (cfg.gamma < 1.0) throw ConfigError("config key 'gamma' must be >= 1");
    positive(cfg.epsilon, "epsilon");
    positive(cfg.alpha, "alpha");
    positive(cfg.beta, "beta");
    if (cfg.max_iters < 0) throw ConfigError("config key 'max_iters' must be >= 0");
    if (cfg.rel_tol < 0.0) throw ConfigError("config key 'rel_tol' must be >= 0");
    if (cfg.patch_side < 1) throw ConfigError("config key 'patch_side' must be >= 1");
    if (cfg.search_window_side < cfg.patch_side)
        throw ConfigError("config key 'search_window_side' must be >= patch_side");
    if (cfg.patches_per_group < cfg.patch_side * cfg.patch_side)
        throw ConfigError("config key 'patches_per_group' must be >= patch_side^2");
    if (cfg.reference_stride < 1) throw ConfigError("config key 'reference_stride' must be >= 1");
    if (cfg.threads < 0) throw ConfigError("config key 'threads' must be >= 0");

    std::vector<std::string> warnings;
    const FidelityParams fp{cfg.rho, cfg.gamma, 1.0};
    if (!fp.strictly_convex())
        warnings.push_back("rho * gamma^4 exceeds 4096/27: fidelity loses strict convexity");
    return warnings;
}

ModelParams model_params(const RunConfig& cfg) {
    ModelParams m;
    m.tau = cfg.tau_over_beta * cfg.beta;
    m.lambda = cfg.lambda;
    m.mu = cfg.mu;
    m.rho = cfg.rho;
    m.gamma = cfg.gamma;
    m.epsilon = cfg.epsilon;
    return m;
}

AlgoParams algo_params(const RunConfig& cfg) {
    AlgoParams a;
    a.alpha = cfg.alpha;
    a.beta = cfg.beta;
    a.max_iters = cfg.max_iters;
    a.rel_tol = cfg.rel_tol;
    return a;
}

BlockMatchConfig match_config(const RunConfig& cfg) {
    BlockMatchConfig b;
    b.looks = cfg.looks;
    b.search_window_side = cfg.search_window_side;
    b.patch_side = cfg.patch_side;
    b.patches_per_group = cfg.patches_per_group;
    b.reference_stride = cfg.reference_stride;
    return b;
}

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.center = cfg.center;
    o.threads = cfg.threads;
    return o;
}

} // namespace despeck
