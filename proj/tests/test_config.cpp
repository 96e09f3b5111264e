#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "despeck/config.hpp"

using namespace despeck;

namespace {

struct ExpectedPreset {
    const char* name;
    RunConfig::Algorithm alg;
    int looks, window, patch, patches;
    double tau_over_beta, lambda, mu, rho, gamma;
    int practical_iters; // ignored for the fixed algorithm
};

// Published per-look settings, both image classes, both algorithms.
const ExpectedPreset kExpected[] = {
    {"L1-standard", RunConfig::Algorithm::practical, 1, 50, 10, 150, 1.0 / 50, 2.6, 1, 0.01, 4.0, 68},
    {"L3-standard", RunConfig::Algorithm::practical, 3, 50, 9, 120, 1.0 / 150, 1.3, 1, 1.5, 1.9, 24},
    {"L5-standard", RunConfig::Algorithm::practical, 5, 50, 8, 100, 1.0 / 250, 0.8, 1, 2.0, 1.3, 19},
    {"L1-remote", RunConfig::Algorithm::practical, 1, 50, 10, 150, 1.0 / 50, 2.6, 1, 0.01, 4.0, 68},
    {"L3-remote", RunConfig::Algorithm::practical, 3, 50, 9, 120, 1.0 / 150, 1.2, 1, 1.5, 1.9, 24},
    {"L5-remote", RunConfig::Algorithm::practical, 5, 50, 8, 100, 1.0 / 250, 0.7, 1, 2.0, 1.3, 19},
    {"L1-standard", RunConfig::Algorithm::fixed, 1, 50, 10, 150, 1.0 / 50, 1.8, 1, 0.01, 4.0, 0},
    {"L3-standard", RunConfig::Algorithm::fixed, 3, 50, 9, 120, 1.0 / 150, 1.0, 1, 1.5, 1.9, 0},
    {"L5-standard", RunConfig::Algorithm::fixed, 5, 50, 8, 100, 1.0 / 250, 0.6, 1, 2.0, 1.3, 0},
    {"L1-remote", RunConfig::Algorithm::fixed, 1, 50, 10, 150, 1.0 / 100, 1.0, 1, 0.01, 4.0, 0},
    {"L3-remote", RunConfig::Algorithm::fixed, 3, 50, 9, 120, 1.0 / 150, 0.45, 1, 1.5, 1.9, 0},
    {"L5-remote", RunConfig::Algorithm::fixed, 5, 50, 8, 100, 1.0 / 200, 0.15, 1, 2.0, 1.3, 0},
};

} // namespace

TEST_CASE("presets reproduce the published parameter tables") {
    for (const auto& e : kExpected) {
        const RunConfig cfg = preset_config(e.name, e.alg);
        CAPTURE(e.name);
        CHECK(cfg.looks == e.looks);
        CHECK(cfg.search_window_side == e.window);
        CHECK(cfg.patch_side == e.patch);
        CHECK(cfg.patches_per_group == e.patches);
        CHECK(cfg.reference_stride == e.patch / 2);
        CHECK(cfg.tau_over_beta == doctest::Approx(e.tau_over_beta).epsilon(1e-15));
        CHECK(cfg.lambda == doctest::Approx(e.lambda).epsilon(1e-15));
        CHECK(cfg.mu == doctest::Approx(e.mu));
        CHECK(cfg.rho == doctest::Approx(e.rho));
        CHECK(cfg.gamma == doctest::Approx(e.gamma));
        CHECK(cfg.epsilon == doctest::Approx(1e-10));
        CHECK(cfg.beta == doctest::Approx(1.001));
        if (e.alg == RunConfig::Algorithm::practical) {
            CHECK(cfg.max_iters == e.practical_iters);
            CHECK(cfg.center);
        } else {
            CHECK(cfg.alpha == doctest::Approx(1e-3));
            CHECK(cfg.rel_tol == doctest::Approx(1e-3));
        }
        CHECK_NOTHROW(validate_config(cfg));
    }
    CHECK_THROWS_AS(preset_config("L7-standard", RunConfig::Algorithm::practical), ConfigError);
    CHECK(preset_names().size() == 6);
}

TEST_CASE("config serialization round-trips") {
    namespace fs = std::filesystem;
    RunConfig cfg = preset_config("L3-standard", RunConfig::Algorithm::practical);
    cfg.seed = 123456789ULL;
    cfg.threads = 3;
    cfg.lambda = 1.2345678901234567;

    const fs::path dir = fs::temp_directory_path() / "despeck_cfg_test";
    fs::create_directories(dir);
    const std::string path = (dir / "run.cfg").string();
    {
        std::ofstream out(path);
        out << serialize_config(cfg);
    }
    const RunConfig back = parse_config_file(path, RunConfig{});
    CHECK(back.algorithm == cfg.algorithm);
    CHECK(back.looks == cfg.looks);
    CHECK(back.seed == cfg.seed);
    CHECK(back.tau_over_beta == cfg.tau_over_beta);
    CHECK(back.lambda == cfg.lambda);
    CHECK(back.mu == cfg.mu);
    CHECK(back.rho == cfg.rho);
    CHECK(back.gamma == cfg.gamma);
    CHECK(back.epsilon == cfg.epsilon);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.beta == cfg.beta);
    CHECK(back.max_iters == cfg.max_iters);
    CHECK(back.rel_tol == cfg.rel_tol);
    CHECK(back.search_window_side == cfg.search_window_side);
    CHECK(back.patch_side == cfg.patch_side);
    CHECK(back.patches_per_group == cfg.patches_per_group);
    CHECK(back.reference_stride == cfg.reference_stride);
    CHECK(back.center == cfg.center);
    CHECK(back.threads == cfg.threads);
    fs::remove_all(dir);
}

TEST_CASE("config files accept comments and report bad keys") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "despeck_cfg_test2";
    fs::create_directories(dir);
    const std::string path = (dir / "run.cfg").string();
    {
        std::ofstream out(path);
        out << "# a comment\n"
            << "lambda = 2.5   # trailing comment\n"
            << "\n"
            << "looks=5\n";
    }
    const RunConfig cfg = parse_config_file(path, RunConfig{});
    CHECK(cfg.lambda == 2.5);
    CHECK(cfg.looks == 5);

    {
        std::ofstream out(path);
        out << "lambada = 2.5\n";
    }
    try {
        parse_config_file(path, RunConfig{});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("lambada") != std::string::npos);
    }

    {
        std::ofstream out(path);
        out << "looks = soup\n";
    }
    try {
        parse_config_file(path, RunConfig{});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("looks") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("validation names the offending key") {
    RunConfig cfg = preset_config("L3-standard", RunConfig::Algorithm::practical);
    cfg.patches_per_group = 10; // below patch_side^2 = 81
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("patches_per_group") != std::string::npos);
    }

    cfg = preset_config("L3-standard", RunConfig::Algorithm::practical);
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg = preset_config("L3-standard", RunConfig::Algorithm::practical);
    cfg.rho = 200.0;
    cfg.gamma = 2.0; // rho*gamma^4 = 3200 > 4096/27: warned, not fatal
    const auto warnings = validate_config(cfg);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("convexity") != std::string::npos);
}

TEST_CASE("derived parameter structs") {
    const RunConfig cfg = preset_config("L3-standard", RunConfig::Algorithm::practical);
    const ModelParams m = model_params(cfg);
    CHECK(m.tau == doctest::Approx(1.001 / 150.0).epsilon(1e-15));
    const BlockMatchConfig b = match_config(cfg);
    CHECK(b.looks == 3);
    CHECK(b.patch_side == 9);
    const AlgoParams a = algo_params(cfg);
    CHECK(a.max_iters == 24);
}
