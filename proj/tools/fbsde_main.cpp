#include "fbsde/parallel.hpp"
#include "fbsde/run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo FBSDE solver for quasilinear parabolic systems"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "run the job described by a JSON config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_path;
    std::optional<int> threads;
    solve->add_option("config", config_path, "path to the run configuration")->required();
    solve->add_option("--seed", seed, "override the configured RNG seed");
    solve->add_option("--out", out_path, "override the configured CSV output path");
    solve->add_option("--threads", threads, "worker threads (default: $FBSDE_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? fbsde::exit_ok : fbsde::exit_usage;
    }

    std::ifstream file(config_path, std::ios::binary);
    if (!file) {
        std::cerr << "error: cannot read " << config_path << "\n";
        return fbsde::exit_io;
    }
    std::ostringstream text;
    text << file.rdbuf();

    fbsde::RunConfig config;
    try {
        config = fbsde::parse_config(text.str());
    } catch (const fbsde::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fbsde::exit_usage;
    }
    if (seed) {
        config.seed = *seed;
        config.solver.seed = *seed;
    }
    if (out_path) config.output = *out_path;
    if (threads) fbsde::set_thread_count(*threads);

    return fbsde::run(config, std::cout, std::cerr);
}
