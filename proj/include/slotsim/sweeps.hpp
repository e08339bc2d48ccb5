#pragma once

// Sweep drivers: spectra simulated along an intensity / density / box-length
// axis with a Fano-Voigt fit per point. Fit failures flag the row and the
// sweep continues.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "slotsim/analysis.hpp"
#include "slotsim/dynamics.hpp"

namespace slotsim {

struct ShiftRow {
    double sweep_value = 0.0;   // intensity (W/m^2), density (1/m^3) or length (m)
    double omega0_peak = 0.0;   // rad/s, resolved drive at this point
    FitResult fit;
    Spectrum spectrum;
    bool ok = false;
};

/// Gaussian FWHM of the Doppler profile for the fit, floored so the Voigt
/// parametrization stays regular for stationary ensembles.
inline double doppler_fwhm(const PhysicalParams& physics, double temperature, double mass) {
    const double sigma_v =
        temperature > 0.0 ? std::sqrt(constants::k_boltzmann * temperature / mass) : 0.0;
    const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * physics.n_eff * physics.k() * sigma_v;
    return std::max(fwhm, 1e-3 * physics.gamma0);
}

inline ShiftRow simulate_and_fit(const Scenario& sc, double sweep_value, int workers) {
    ShiftRow row;
    row.sweep_value = sweep_value;
    row.omega0_peak = sc.drive.omega0_peak;
    row.spectrum = simulate_spectrum(sc, workers);
    const double wd =
        doppler_fwhm(sc.physics, sc.ensemble.temperature, sc.ensemble.mass) / sc.physics.gamma0;
    try {
        row.fit = fit_lineshape(row.spectrum, wd);
        row.ok = row.fit.converged;
    } catch (const std::exception&) {
        row.ok = false;
    }
    return row;
}

/// Shift vs probe intensity at fixed geometry and density.
inline std::vector<ShiftRow> extract_shift_vs_intensity(const Scenario& base,
                                                        std::span<const double> intensities,
                                                        int workers = 1) {
    std::vector<ShiftRow> rows;
    rows.reserve(intensities.size());
    for (double intensity : intensities) {
        Scenario sc = base;
        sc.drive = LaserDrive::from_intensity(intensity, sc.physics);
        rows.push_back(simulate_and_fit(sc, intensity, workers));
    }
    return rows;
}

/// Shift vs box length l for a (0.3 lambda, 0.3 lambda, l) vacuum box at fixed
/// density: the 2D -> pseudo-1D crossover scan.
inline std::vector<ShiftRow> box_length_sweep(const Scenario& base,
                                              std::span<const double> lengths,
                                              int workers = 1) {
    std::vector<ShiftRow> rows;
    rows.reserve(lengths.size());
    const double lam = base.physics.lambda_probe;
    for (double l : lengths) {
        Scenario sc = base;
        sc.box = SimulationBox::vacuum({0.3 * lam, 0.3 * lam, l});
        sc.ensemble.n_atoms = EnsembleConfig::atoms_for_density(sc.ensemble.density, sc.box);
        rows.push_back(simulate_and_fit(sc, l, workers));
    }
    return rows;
}

/// Shift vs density in a fixed box (atom count tracks the density).
inline std::vector<ShiftRow> density_sweep(const Scenario& base,
                                           std::span<const double> densities, int workers = 1) {
    std::vector<ShiftRow> rows;
    rows.reserve(densities.size());
    for (double density : densities) {
        Scenario sc = base;
        sc.ensemble.density = density;
        sc.ensemble.n_atoms = EnsembleConfig::atoms_for_density(density, sc.box);
        rows.push_back(simulate_and_fit(sc, density, workers));
    }
    return rows;
}

} // namespace slotsim
