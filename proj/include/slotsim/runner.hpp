#pragma once

// Sweep orchestration and output emission. Each run writes its spectra, a fit
// table, the resolved configuration and a manifest into the output directory.
// Output tables are byte-identical for identical (config, seed) regardless of
// worker count.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "slotsim/ingest.hpp"
#include "slotsim/scenario.hpp"
#include "slotsim/sweeps.hpp"
#include "slotsim/version.hpp"

namespace slotsim {

struct RunOptions {
    std::string output_dir_override;
    int workers = 1;
    int verbosity = 1;  // 0 quiet, 1 normal, 2 verbose
};

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<ShiftRow> rows;
    int flagged_rows = 0;
};

namespace detail {

inline Table fit_table(const ScenarioSpec& spec, const std::vector<ShiftRow>& rows,
                       const std::string& hash, const std::string& sweep_name,
                       const std::string& sweep_unit) {
    Table t;
    t.meta.emplace_back("config_hash", hash);
    t.meta.emplace_back("seed", std::to_string(spec.seed));
    t.meta.emplace_back("trials", std::to_string(spec.trials));
    t.meta.emplace_back("version", version_string());
    t.meta.emplace_back("cp_offset_gamma0", std::to_string(spec.cp_offset_gamma0));
    t.columns = {"index",     sweep_name,  "omega0_peak", "shift",      "shift_err",
                 "shift_cp",  "amplitude", "q",           "gamma_l",    "omega_d",
                 "converged", "residual"};
    t.units = {"1",      sweep_unit, "gamma0", "gamma0", "gamma0", "gamma0",
               "1",      "1",        "gamma0", "gamma0", "bool",   "1"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double om = r.omega0_peak / spec.physics.gamma0;
        t.rows.push_back({static_cast<double>(i), r.sweep_value, om, r.fit.shift,
                          r.fit.shift_err(), r.fit.shift + spec.cp_offset_gamma0,
                          r.fit.amplitude, r.fit.q, r.fit.gamma_l, r.fit.omega_d,
                          r.ok ? 1.0 : 0.0, r.fit.residual_norm});
    }
    return t;
}

} // namespace detail

inline RunResult run_scenario(const ScenarioSpec& spec_in, const RunOptions& opts = {}) {
    namespace fs = std::filesystem;
    ScenarioSpec spec = spec_in;
    if (!opts.output_dir_override.empty()) spec.output_dir = opts.output_dir_override;

    const auto t_start = std::chrono::steady_clock::now();
    const std::string hash = config_hash(spec);
    Scenario base = build_scenario(spec);
    const int workers = opts.workers > 0 ? opts.workers : 1;

    RunResult result;
    result.output_dir = fs::path(spec.output_dir);
    fs::create_directories(result.output_dir);

    const double wd_fit =
        spec.omega_d_gamma0 > 0.0
            ? spec.omega_d_gamma0
            : doppler_fwhm(spec.physics, spec.physics.temperature, spec.mass) /
                  spec.physics.gamma0;

    auto log = [&](const std::string& msg) {
        if (opts.verbosity >= 1) std::cout << msg << "\n";
    };

    std::string sweep_name = "sweep_value", sweep_unit = "1";
    std::vector<double> values = spec.sweep.values;
    switch (spec.sweep.type) {
        case SweepType::detuning:
            sweep_name = "detuning_scan";
            values = {0.0};
            break;
        case SweepType::intensity:
            sweep_name = "intensity";
            sweep_unit = "W_m2";
            break;
        case SweepType::density:
            sweep_name = "density";
            sweep_unit = "per_m3";
            break;
        case SweepType::box_length:
            sweep_name = "box_length";
            sweep_unit = "m";
            break;
    }

    for (std::size_t i = 0; i < values.size(); ++i) {
        Scenario sc = base;
        switch (spec.sweep.type) {
            case SweepType::detuning:
                break;
            case SweepType::intensity:
                sc.drive = LaserDrive::from_intensity(values[i], sc.physics);
                break;
            case SweepType::density:
                sc.ensemble.density = values[i];
                sc.ensemble.n_atoms = EnsembleConfig::atoms_for_density(values[i], sc.box);
                break;
            case SweepType::box_length: {
                const double lam = sc.physics.lambda_probe;
                sc.box = SimulationBox::vacuum({0.3 * lam, 0.3 * lam, values[i]});
                sc.ensemble.n_atoms =
                    EnsembleConfig::atoms_for_density(sc.ensemble.density, sc.box);
                break;
            }
        }

        ShiftRow row;
        row.sweep_value = values[i];
        row.omega0_peak = sc.drive.omega0_peak;
        row.spectrum = simulate_spectrum(sc, workers);
        try {
            row.fit = fit_lineshape(row.spectrum, wd_fit);
            row.ok = row.fit.converged;
        } catch (const std::exception& e) {
            row.ok = false;
            if (opts.verbosity >= 1)
                std::cout << "fit failed for sweep point " << i << ": " << e.what() << "\n";
        }
        if (!row.ok) ++result.flagged_rows;

        char name[64];
        std::snprintf(name, sizeof(name), "spectrum_%03zu.tsv", i);
        write_spectrum_table((result.output_dir / name).string(), row.spectrum,
                             {{"version", version_string()},
                              {"sweep_type", sweep_name},
                              {"sweep_value", std::to_string(values[i])}});
        log("wrote " + (result.output_dir / name).string() +
            (row.ok ? "  shift = " + std::to_string(row.fit.shift) + " gamma0" : "  [fit flagged]"));
        result.rows.push_back(std::move(row));
    }

    write_table((result.output_dir / "fits.tsv").string(),
                detail::fit_table(spec, result.rows, hash, sweep_name, sweep_unit));

    {
        std::ofstream os(result.output_dir / "resolved_config.json");
        os << resolved_config(spec).dump(2) << "\n";
    }
    {
        const auto wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        std::ofstream os(result.output_dir / "manifest.txt");
        os << "config_hash " << hash << "\n";
        os << "seed " << spec.seed << "\n";
        os << "trials " << spec.trials << "\n";
        os << "workers " << workers << "\n";
        os << "version " << version_string() << "\n";
        os << "wall_time_s " << wall << "\n";
        int flagged = result.flagged_rows;
        os << "flagged_rows " << flagged << "\n";
    }
    return result;
}

} // namespace slotsim
