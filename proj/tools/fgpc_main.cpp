#include "fgpc/cli/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic limit-cycle surrogates by Fourier-polynomial-chaos Galerkin projection"};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    auto* run = app.add_subcommand("run", "Execute the pipeline described by a config file");
    run->add_option("config", run_config, "JSON experiment config")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--output-dir", output_dir, "Override the artifact directory");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "Check a config file without computing anything");
    validate->add_option("config", validate_config, "JSON experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*run) {
        fgpc::cli::RunOverrides o;
        o.seed = seed;
        if (output_dir)
            o.output_dir = *output_dir;
        return fgpc::cli::run(run_config, o, std::cerr);
    }
    return fgpc::cli::validate(validate_config, std::cout);
}
