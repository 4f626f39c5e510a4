// exitlab command-line interface: run experiments, export plot data, list the
// model/observable catalogs.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "exitlab/config.hpp"
#include "exitlab/errors.hpp"
#include "exitlab/model.hpp"
#include "exitlab/runner.hpp"
#include "exitlab/simd/isa.hpp"

namespace {

int cmd_run(const std::string& config_path, std::uint64_t* seed, unsigned* workers,
            std::string* out_dir, const std::string& kernels) {
    using namespace exitlab;
    if (kernels == "scalar") simd::set_active_isa(simd::Isa::scalar);
    else if (kernels == "avx2") simd::set_active_isa(simd::Isa::avx2);
    else if (kernels == "neon") simd::set_active_isa(simd::Isa::neon);
    else if (kernels != "auto") throw ConfigError("unknown --kernels value: " + kernels);

    ExperimentConfig cfg = parse_config_file(config_path);
    if (seed) cfg.master_seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out_dir = *out_dir;
    const RunManifest manifest = run(cfg);
    std::printf("experiment %s: %s (%.1fs)\n", manifest.experiment.c_str(),
                manifest.all_passed ? "all declared criteria hold" : "FAILED criteria present",
                manifest.wall_seconds);
    std::printf("outputs under %s (report: %s)\n", manifest.out_dir.c_str(),
                manifest.report_file.c_str());
    return manifest.all_passed ? 0 : 1;
}

int cmd_plot_data(const std::string& manifest_path) {
    const exitlab::RunManifest manifest = exitlab::load_manifest(manifest_path);
    exitlab::emit_plot_data(manifest);
    std::printf("plot data written under %s\n", manifest.out_dir.c_str());
    return 0;
}

int cmd_catalog() {
    std::printf("models:\n");
    for (const auto& name : exitlab::model_names()) {
        const auto& m = exitlab::model_by_name(name);
        std::printf("  %-14s d=%zu diffusivity_probe=%s\n", name.c_str(), m.dim,
                    m.probe.passed ? "pass" : "fail");
    }
    std::printf("observables:\n");
    for (const auto& name : exitlab::observable_names()) {
        const auto& o = exitlab::observable_by_name(name);
        std::printf("  %-14s d=%zu l=%zu jacobian=%s\n", name.c_str(), o.in_dim, o.out_dim,
                    o.has_analytic_jacobian() ? "analytic" : "finite-difference");
    }
    std::printf("experiments:\n");
    for (const auto& name : exitlab::experiment_names()) std::printf("  %s\n", name.c_str());
    std::printf("kernels: active=%s\n", exitlab::simd::isa_name(exitlab::simd::active_isa()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for small-time first-exit scaling limits of Ito "
                 "diffusions"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, kernels = "auto";
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::string out_dir;
    bool seed_set = false, workers_set = false, out_dir_set = false;

    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    run_cmd->add_option("config", config_path, "flat key = value config file")->required();
    run_cmd->add_option("--seed", seed, "override master_seed")->each([&](const std::string&) {
        seed_set = true;
    });
    run_cmd->add_option("--workers", workers, "override worker count (0 = hardware)")
        ->each([&](const std::string&) { workers_set = true; });
    run_cmd->add_option("--out-dir", out_dir, "override output directory")
        ->each([&](const std::string&) { out_dir_set = true; });
    run_cmd->add_option("--kernels", kernels, "kernel ISA: auto|scalar|avx2|neon");

    auto* plot_cmd = app.add_subcommand("plot-data", "emit tidy curve CSVs from a manifest");
    plot_cmd->add_option("manifest", manifest_path, "manifest.json from a run")->required();

    app.add_subcommand("catalog", "list models, observables and experiments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return cmd_run(config_path, seed_set ? &seed : nullptr,
                           workers_set ? &workers : nullptr, out_dir_set ? &out_dir : nullptr,
                           kernels);
        }
        if (plot_cmd->parsed()) return cmd_plot_data(manifest_path);
        return cmd_catalog();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
