#include "eitlog/errors.hpp"
#include "eitlog/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"experiment runner for the logarithmic boundary-map library"};
    app.require_subcommand(0, 1);

    bool list = false;
    app.add_flag("--list-experiments", list, "print experiment names and exit");

    std::string config_path;
    std::string out_dir;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    CLI::App* run = app.add_subcommand("run", "run the experiment in <config>");
    run->add_option("config", config_path, "flat key = value config file")
        ->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--seed", seed, "seed (overrides config)");
    run->add_option("--format", format, "summary format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& name : eitlog::experiment_names())
            std::cout << name << '\n';
        return eitlog::kExitPass;
    }
    if (!run->parsed()) {
        std::cerr << app.help();
        return eitlog::kExitConfigError;
    }

    try {
        const eitlog::RunConfig cfg = eitlog::parse_config_file(config_path);
        const bool quiet = format == "csv";
        const auto out = eitlog::run_config(
            cfg,
            out_dir.empty() ? std::nullopt : std::make_optional(out_dir),
            seed, quiet ? nullptr : &std::cout);
        if (quiet) {
            std::cout << "experiment,passed,runtime_seconds\n";
            for (const auto& [name, report] : out.reports)
                std::cout << name << ',' << (report.passed() ? 1 : 0) << ','
                          << report.runtime_seconds << '\n';
        }
        std::cout << "manifest: " << out.manifest.string() << '\n';
        return out.exit_code;
    } catch (const eitlog::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return eitlog::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return eitlog::kExitRuntimeError;
    }
}
