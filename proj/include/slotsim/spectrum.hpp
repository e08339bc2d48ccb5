#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotsim {

/// Detuning scan of the time-and-atom-averaged excited-state population.
/// Detunings are probe detunings (omega_L - omega_a) in units of gamma0,
/// strictly increasing; a positive fitted shift is a blueshift.
struct Spectrum {
    std::vector<double> detunings;
    std::vector<double> absorption;
    std::vector<double> std_err;

    std::string config_hash;
    std::uint64_t seed = 0;
    int trials = 0;
    int failed_trials = 0;

    /// check_population: enforce absorption in [0, 1] (simulation outputs);
    /// imported or synthetic lineshapes may carry Fano dips below zero.
    void validate(bool check_population = true) const {
        if (detunings.size() != absorption.size() ||
            (!std_err.empty() && std_err.size() != detunings.size()))
            throw std::invalid_argument("spectrum column lengths differ");
        for (std::size_t i = 0; i + 1 < detunings.size(); ++i)
            if (!(detunings[i] < detunings[i + 1]))
                throw std::invalid_argument("spectrum detuning grid not strictly increasing");
        for (double a : absorption) {
            if (!std::isfinite(a)) throw std::invalid_argument("non-finite absorption");
            if (check_population && (a < -1e-12 || a > 1.0 + 1e-12))
                throw std::invalid_argument("absorption outside [0, 1]");
        }
        for (double e : std_err)
            if (e < 0.0) throw std::invalid_argument("negative standard error");
    }
};

} // namespace slotsim
