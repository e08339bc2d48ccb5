// slotsim command-line front end: scenario execution, built-in verification
// and reference-table regeneration.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 verification failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "slotsim/ingest.hpp"
#include "slotsim/runner.hpp"
#include "slotsim/scenario.hpp"
#include "slotsim/verify.hpp"
#include "slotsim/version.hpp"

namespace {

int default_workers() {
    if (const char* env = std::getenv("SLOTSIM_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slotsim: Monte-Carlo simulator for dipole-interacting thermal atoms "
                 "coupled to a slot waveguide"};
    app.set_version_flag("--version", slotsim::version_string());
    app.fallthrough();  // allow global flags after the subcommand

    int workers = default_workers();
    int verbosity = 1;
    app.add_option("--workers", workers, "worker thread count (env SLOTSIM_WORKERS)");
    app.add_flag_callback("--quiet,-q", [&] { verbosity = 0; }, "suppress progress output");
    app.add_flag_callback("--verbose,-v", [&] { verbosity = 2; }, "extra progress output");

    std::string scenario_path;
    std::string out_override;
    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_override, "override the output directory");

    auto* verify = app.add_subcommand("verify", "run the built-in verification suite");

    std::string oracle_dir = "data/oracle";
    auto* oracle = app.add_subcommand("oracle-tables", "regenerate the reference tables");
    oracle->add_option("--out", oracle_dir, "output directory for the tables");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            slotsim::ScenarioSpec spec;
            try {
                spec = slotsim::parse_scenario_file(scenario_path);
            } catch (const slotsim::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            slotsim::RunOptions opts;
            opts.output_dir_override = out_override;
            opts.workers = spec.workers > 0 ? spec.workers : workers;
            opts.verbosity = verbosity;
            const auto result = slotsim::run_scenario(spec, opts);
            if (verbosity >= 1) {
                std::cout << "results in " << result.output_dir.string();
                if (result.flagged_rows > 0)
                    std::cout << " (" << result.flagged_rows << " fit rows flagged)";
                std::cout << "\n";
            }
            return 0;
        }
        if (*verify) {
            const auto checks = slotsim::run_verification();
            const bool ok = slotsim::print_verification(std::cout, checks);
            return ok ? 0 : 4;
        }
        if (*oracle) {
            const auto files = slotsim::write_oracle_tables(oracle_dir);
            if (verbosity >= 1)
                for (const auto& f : files) std::cout << "wrote " << f << "\n";
            return 0;
        }
    } catch (const slotsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
