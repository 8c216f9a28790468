// helicable: 2-D eddy-current solver for twisted cables.
//
//   helicable run <config.json> [--dry-run] [--output <dir>] [--verbose]

#include <iostream>

#include <CLI11.hpp>

#include "helicable/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Helicoidal A-v eddy-current solver for twisted cables"};
    app.set_version_flag("--version", std::string(helicable::version));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Solve the problem described by a JSON config");
    std::string config;
    std::string output;
    helicable::RunOptions opt;
    run->add_option("config", config, "Run configuration (JSON)")->required();
    run->add_flag("--dry-run", opt.dry_run, "Validate config and mesh, print the DOF summary, stop");
    run->add_option("--output", output, "Output directory (overrides output.directory)");
    run->add_flag("--verbose", opt.verbose, "Stage timings on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : helicable::exit_code::config;
    }
    if (!output.empty())
        opt.output_directory = output;
    return helicable::run_main(config, opt, std::cout, std::cerr);
}
