#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "difflms/cli.hpp"
#include "difflms/common.hpp"

int main(int argc, char** argv) {
    CLI::App app{"diffusion/centralized LMS adaptive-network simulator"};
    app.require_subcommand(1);

    difflms::cli::RunOptions opts;
    std::uint64_t seed = 0;
    int trials = 0, iters = 0;
    double tol_db = 0.0;

    CLI::App* run = app.add_subcommand("run", "run a preset or a config file");
    run->add_option("--preset", opts.preset,
                    "one of: fig3-opcurves, fig5-two-node, fig6-n20, "
                    "table4-check, appendixB-check");
    run->add_option("--config", opts.config_path, "path to a JSON experiment config");
    run->add_option("--out", opts.out_dir, "output directory (default: out)");
    auto* oseed = run->add_option("--seed", seed, "base seed for all trials");
    auto* otrials = run->add_option("--trials", trials, "override trial count");
    auto* oiters = run->add_option("--iters", iters, "override iteration count");
    auto* otol = run->add_option("--tol-db", tol_db, "theory-match tolerance in dB");
    run->add_option("--threads", opts.threads, "worker threads (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*oseed) opts.seed = seed;
    if (*otrials) opts.trials = trials;
    if (*oiters) opts.iters = iters;
    if (*otol) opts.tol_db = tol_db;

    try {
        return difflms::cli::run_command(opts);
    } catch (const difflms::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
