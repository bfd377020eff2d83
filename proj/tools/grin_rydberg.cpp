// grin-rydberg: design and simulation pipeline for a GRIN Luneburg lens
// coupled to a Rydberg-atom RF receiver.
//
//   grin-rydberg <design|trace|fieldmap|sensitivity|eit-synth|eit-fit|gain>
//                --config <path> [--out <dir>] [--seed <n>]
//
// Exit codes: 0 success, 1 domain/data failure, 2 usage failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rydlens/config.hpp"
#include "rydlens/error.hpp"
#include "rydlens/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"GRIN Luneburg lens / Rydberg receiver design pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;  // -1: keep the config file's seed

    for (const auto& name : rydlens::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default: out)");
        sub->add_option("--seed", seed, "random seed override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help lands here with a zero exit code; genuine usage errors
        // return CLI11's nonzero codes, normalized to 2.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        rydlens::RunConfig rc = rydlens::RunConfig::load(config_path);
        if (seed >= 0)
            rc.seed = static_cast<unsigned long long>(seed);
        const std::string subcommand = app.get_subcommands().front()->get_name();
        return rydlens::run_pipeline(subcommand, rc, out_dir, std::cerr);
    } catch (const rydlens::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
