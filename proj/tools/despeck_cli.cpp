// Command-line front end: noise synthesis, denoising with either solver,
// and quality metrics over PGM/NLR1 images.
#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "despeck/config.hpp"
#include "despeck/image_io.hpp"
#include "despeck/metrics.hpp"
#include "despeck/solver.hpp"

namespace {

using namespace despeck;

std::string format_metric(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

int run_add_noise(const std::string& input, const std::string& output, int looks,
                  std::uint64_t seed) {
    const IntensityImage u = read_image(input);
    if (looks < 1) throw ConfigError("looks must be >= 1");
    const IntensityImage v = apply_gamma_noise(u, NoiseSpec{looks, seed});
    write_nlr1(output, v);
    std::printf("seed=%" PRIu64 "\n", seed);
    return 0;
}

struct DenoiseCli {
    std::string input, output;
    std::string config_path, preset, algorithm;
    std::string init_path, preview_path, diagnostics_path, dump_config_path, dump_groups_path;
    int threads = -1;
};

RunConfig effective_config(const DenoiseCli& cli) {
    RunConfig cfg;
    if (!cli.algorithm.empty()) {
        if (cli.algorithm == "fixed")
            cfg.algorithm = RunConfig::Algorithm::fixed;
        else if (cli.algorithm == "practical")
            cfg.algorithm = RunConfig::Algorithm::practical;
        else
            throw ConfigError("--algorithm must be fixed or practical");
    }
    if (!cli.preset.empty()) cfg = preset_config(cli.preset, cfg.algorithm);
    if (!cli.config_path.empty()) cfg = parse_config_file(cli.config_path, cfg);
    if (cli.threads >= 0) cfg.threads = cli.threads;
    return cfg;
}

int run_denoise(const DenoiseCli& cli) {
    const RunConfig cfg = effective_config(cli);
    for (const auto& warning : validate_config(cfg))
        std::fprintf(stderr, "warning: %s\n", warning.c_str());

    if (!cli.dump_config_path.empty()) {
        std::ofstream out(cli.dump_config_path);
        if (!out) throw IoError(cli.dump_config_path + ": cannot open for writing");
        out << serialize_config(cfg);
    }

    const IntensityImage noisy = read_image(cli.input);
    const ModelParams model = model_params(cfg);
    const AlgoParams algo = algo_params(cfg);
    const BlockMatchConfig match = match_config(cfg);
    SolverOptions opts = solver_options(cfg);
    opts.diagnostics = !cli.diagnostics_path.empty();

    SolveResult result;
    if (cfg.algorithm == RunConfig::Algorithm::fixed) {
        IntensityImage init;
        if (!cli.init_path.empty()) {
            init = read_image(cli.init_path);
        } else {
            // No initial estimate supplied: bootstrap with the practical
            // solver (same preset when named, otherwise same parameters).
            RunConfig boot = cfg;
            boot.algorithm = RunConfig::Algorithm::practical;
            if (!cli.preset.empty()) boot = preset_config(cli.preset, boot.algorithm);
            boot.threads = cfg.threads;
            SolverOptions boot_opts = solver_options(boot);
            const SolveResult warm = parm_practical(noisy, model_params(boot), algo_params(boot),
                                                    match_config(boot), boot_opts);
            init = from_log(warm.x);
        }
        init = clip_positive(init, 1e-6);
        const auto groups = block_match(init, match, opts.threads);
        if (!cli.dump_groups_path.empty()) {
            std::ofstream out(cli.dump_groups_path);
            if (!out) throw IoError(cli.dump_groups_path + ": cannot open for writing");
            write_groups_csv(out, groups);
        }
        result = parm_fixed(noisy, init, groups, model, algo, opts);
    } else {
        if (!cli.dump_groups_path.empty()) {
            const IntensityImage estimate = clip_positive(noisy, 1e-6);
            const auto groups = block_match(estimate, match, opts.threads);
            std::ofstream out(cli.dump_groups_path);
            if (!out) throw IoError(cli.dump_groups_path + ": cannot open for writing");
            write_groups_csv(out, groups);
        }
        result = parm_practical(noisy, model, algo, match, opts);
    }

    const IntensityImage restored = from_log(result.x);
    write_nlr1(cli.output, restored);
    if (!cli.preview_path.empty()) write_pgm(cli.preview_path, restored);
    if (!cli.diagnostics_path.empty()) {
        std::ofstream out(cli.diagnostics_path);
        if (!out) throw IoError(cli.diagnostics_path + ": cannot open for writing");
        write_diagnostics_csv(out, result.diagnostics);
    }
    std::printf("iterations=%d\n", result.iterations);
    return 0;
}

struct MetricsCli {
    std::string reference, candidate;
    bool want_psnr = false, want_ssim = false;
    std::string enl_region, ratio_out, csv_path;
};

Region parse_region(const std::string& spec) {
    Region r;
    char comma;
    std::istringstream in(spec);
    if (!(in >> r.top >> comma >> r.left >> comma >> r.height >> comma >> r.width) ||
        !(in >> std::ws).eof())
        throw ConfigError("--enl expects top,left,height,width");
    return r;
}

int run_metrics(const MetricsCli& cli) {
    const IntensityImage ref = read_image(cli.reference);
    const IntensityImage cand = read_image(cli.candidate);

    std::optional<double> psnr_value, ssim_value, enl_value;
    if (cli.want_psnr) psnr_value = psnr(ref, cand);
    if (cli.want_ssim) ssim_value = ssim(ref, cand);
    if (!cli.enl_region.empty()) enl_value = enl(cand, parse_region(cli.enl_region));

    if (psnr_value) std::printf("psnr=%s\n", format_metric(*psnr_value).c_str());
    if (ssim_value) std::printf("ssim=%s\n", format_metric(*ssim_value).c_str());
    if (enl_value) std::printf("enl=%s\n", format_metric(*enl_value).c_str());

    if (!cli.ratio_out.empty()) write_nlr1(cli.ratio_out, ratio_image(ref, cand));

    if (!cli.csv_path.empty()) {
        const bool fresh = !std::filesystem::exists(cli.csv_path) ||
                           std::filesystem::file_size(cli.csv_path) == 0;
        std::ofstream out(cli.csv_path, std::ios::app);
        if (!out) throw IoError(cli.csv_path + ": cannot open for writing");
        if (fresh) out << "reference,candidate,psnr,ssim,enl\n";
        out << cli.reference << ',' << cli.candidate << ','
            << (psnr_value ? format_metric(*psnr_value) : "") << ','
            << (ssim_value ? format_metric(*ssim_value) : "") << ','
            << (enl_value ? format_metric(*enl_value) : "") << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal low-rank despeckling for L-look intensity images"};
    app.require_subcommand(1);

    std::string noise_in, noise_out;
    int noise_looks = 3;
    std::uint64_t noise_seed = 0;
    auto* addn = app.add_subcommand("add-noise", "multiply an image by L-look gamma speckle");
    addn->add_option("-i,--input", noise_in, "input image (PGM or NLR1)")->required();
    addn->add_option("-o,--output", noise_out, "output image (NLR1)")->required();
    addn->add_option("-L,--looks", noise_looks, "number of looks");
    addn->add_option("--seed", noise_seed, "PRNG seed");

    DenoiseCli den;
    auto* dn = app.add_subcommand("denoise", "restore an image degraded by speckle");
    dn->add_option("-i,--input", den.input, "noisy image (PGM or NLR1)")->required();
    dn->add_option("-o,--output", den.output, "restored image (NLR1)")->required();
    dn->add_option("-c,--config", den.config_path, "key = value config file");
    dn->add_option("-p,--preset", den.preset, "preset name, e.g. L3-standard");
    dn->add_option("-a,--algorithm", den.algorithm, "fixed or practical");
    dn->add_option("--init", den.init_path, "initial estimate for the fixed algorithm");
    dn->add_option("--preview", den.preview_path, "also write an 8-bit PGM preview");
    dn->add_option("--diagnostics", den.diagnostics_path, "write per-iteration CSV diagnostics");
    dn->add_option("--dump-config", den.dump_config_path, "write the effective config");
    dn->add_option("--dump-groups", den.dump_groups_path, "write the initial matching as CSV");
    dn->add_option("--threads", den.threads, "worker threads (0 = all cores)");

    MetricsCli met;
    auto* mt = app.add_subcommand("metrics", "compare a restored image against a reference");
    mt->add_option("-r,--reference", met.reference, "reference image")->required();
    mt->add_option("-c,--candidate", met.candidate, "image under test")->required();
    mt->add_flag("--psnr", met.want_psnr, "peak signal-to-noise ratio");
    mt->add_flag("--ssim", met.want_ssim, "structural similarity");
    mt->add_option("--enl", met.enl_region, "ENL over region top,left,height,width");
    mt->add_option("--ratio-out", met.ratio_out, "write reference/candidate ratio (NLR1)");
    mt->add_option("--csv", met.csv_path, "append results to this CSV report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(addn)) return run_add_noise(noise_in, noise_out, noise_looks, noise_seed);
        if (app.got_subcommand(dn)) return run_denoise(den);
        if (app.got_subcommand(mt)) return run_metrics(met);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
