#pragma once

// Built-in verification: closed-form identities, oracle cross-checks and the
// reference-number pipeline, each reported as measured vs expected.

#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "slotsim/analysis.hpp"
#include "slotsim/dynamics.hpp"
#include "slotsim/oracle.hpp"
#include "slotsim/reference.hpp"

namespace slotsim {

struct Check {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;  // |measured - expected| <= tolerance
    bool pass = false;
};

namespace detail {

inline Check make_check(std::string name, double measured, double expected, double tol) {
    Check c;
    c.name = std::move(name);
    c.measured = measured;
    c.expected = expected;
    c.tolerance = tol;
    c.pass = std::abs(measured - expected) <= tol;
    return c;
}

} // namespace detail

inline std::vector<Check> run_verification() {
    std::vector<Check> checks;
    const double gamma0 = 1.0;

    {  // free-space self-limit
        const auto g = greens_free_space_xx({0, 0, 1e-4}, {0, 0, 0}, 1.0);
        const double target = 1.0 / (6.0 * constants::pi);
        checks.push_back(detail::make_check("greens: Im G_xx self-limit = 1/(6 pi)", g.imag(),
                                            target, 1e-6 * target));
    }
    {  // Purcell identity PF = 1 + 6 pi Gamma_1D/gamma0
        const double g1d = 34.0 / (6.0 * constants::pi);
        const double pf = purcell_factor(g1d, gamma0);
        checks.push_back(detail::make_check("greens: PF = 1 + 6 pi Gamma_1D/gamma0", pf, 35.0,
                                            1e-12 * 35.0));
    }
    {  // scattering identities on a 1001-point grid
        const double v_p = constants::c_light / 2.53;
        const double g0 = coupling_from_gamma_wg(34.0 * gamma0, v_p);
        double worst = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double delta = (i - 500) * 0.2 * gamma0;
            const auto sr = single_atom_scattering(delta, g0, v_p, gamma0, gamma0);
            worst = std::max(worst, std::abs(1.0 + sr.reflection - sr.transmission));
        }
        checks.push_back(detail::make_check("scattering: max |1 + r - t|", worst, 0.0, 1e-14));
        const auto s0 = single_atom_scattering(0.0, g0, v_p, gamma0, gamma0);
        checks.push_back(detail::make_check("scattering: |t(0)| = 1/PF at PF = 35",
                                            std::abs(s0.transmission), 1.0 / 35.0,
                                            1e-12));
    }
    {  // mean-field vs exact Lindblad, N = 2 side-by-side at kR = 0.2
        std::vector<Vec3> pos = {{0, 0, 0}, {0, 0.2, 0}};
        const auto cm = coupling_matrices(pos, 1.0, nullptr, gamma0);
        const double delta0 = -cm.J(0, 1);
        double worst_gap = 0.0;
        double prev_gap = 1e99;
        bool monotone = true;
        for (double om : {0.03, 0.003, 0.0003}) {
            LindbladOptions opts;
            opts.t_max = 400.0;
            const auto exact = lindblad_steady_state(cm, {om, om}, delta0, gamma0, opts);

            Scenario sc;
            sc.physics.lambda_probe = 2.0 * constants::pi;
            sc.physics.n_eff = 1.0;
            sc.physics.gamma0 = gamma0;
            sc.box = SimulationBox::vacuum({10.0, 10.0, 10.0});
            sc.pinned_positions = pos;
            sc.ensemble.n_atoms = 2;
            sc.ensemble.temperature = 0.0;
            sc.ensemble.dt = 5e-4;
            sc.ensemble.t_total = 400.0;
            sc.ensemble.transient_discard = 0.9;
            sc.ensemble.seed = 1;
            sc.drive = LaserDrive::from_rabi(om, sc.physics);
            sc.detunings_gamma0 = {-delta0};
            sc.trials = 1;
            const auto spec = simulate_spectrum(sc);

            const double gap = std::abs(spec.absorption[0] - exact.sigma_ee(0)) /
                               exact.sigma_ee(0);
            worst_gap = std::max(worst_gap, gap);
            monotone = monotone && gap < prev_gap;
            prev_gap = gap;
        }
        checks.push_back(
            detail::make_check("mean-field vs Lindblad: worst relative gap", worst_gap, 0.0,
                               0.05));
        checks.push_back(detail::make_check("mean-field vs Lindblad: gap shrinks with drive",
                                            monotone ? 1.0 : 0.0, 1.0, 0.0));
    }
    {  // Faddeeva vs brute-force reference
        double worst = 0.0;
        for (double x : {0.0, 0.5, 1.5, 3.0, 3.9, 6.0, 11.0, 20.0, -2.5}) {
            for (double y : {0.0, 1e-3, 0.2, 1.0, 6.0}) {
                const double r = std::hypot(x, y);
                if ((r > 4.0 && r < 5.5) || r > 20.5) continue;
                const auto ref = reference::faddeeva_reference({x, y});
                worst = std::max(worst, std::abs(faddeeva({x, y}) - ref) / std::abs(ref));
            }
        }
        checks.push_back(detail::make_check("faddeeva: worst relative error vs reference",
                                            worst, 0.0, 1e-6));
    }
    {  // Kramers-Kronig on the analytic Lorentzian pair
        const int n = 2001;
        const double span = 80.0, h = span / (n - 1);
        std::vector<double> im(n);
        for (int i = 0; i < n; ++i)
            im[static_cast<std::size_t>(i)] = reference::lorentzian_im(-span / 2.0 + i * h, 1.0);
        const auto kk = kramers_kronig(im, h);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = -span / 2.0 + i * h;
            if (std::abs(d) > 0.4 * span) continue;
            worst = std::max(worst, std::abs(kk.re_chi[static_cast<std::size_t>(i)] -
                                             reference::lorentzian_re(d, 1.0)));
        }
        checks.push_back(
            detail::make_check("kramers-kronig: Lorentzian pair interior error", worst, 0.0,
                               0.01));
    }
    {  // Fano-Voigt noiseless roundtrip
        Spectrum spec;
        for (int i = 0; i < 161; ++i) {
            const double d = -40.0 + 0.5 * i;
            spec.detunings.push_back(d);
            spec.absorption.push_back(fano_voigt(d, 2.5, 0.04, 6.0, 2.0, 5.0));
        }
        const auto fit = fit_lineshape(spec, 2.0);
        const double err = std::max({std::abs(fit.shift - 2.5) / 2.5,
                                     std::abs(fit.amplitude - 0.04) / 0.04,
                                     std::abs(fit.gamma_l - 5.0) / 5.0,
                                     std::abs(fit.q - 6.0) / 6.0});
        checks.push_back(detail::make_check("fit: noiseless Fano-Voigt roundtrip", err, 0.0,
                                            1e-6));
    }
    {  // Kerr / single-photon pipeline reference numbers
        const double s_rad = 2.0 * constants::pi * 100e6;
        const auto est = single_photon_phase(1529e-9, 2.53, 200e-6, 1.98e-7, s_rad, 7.68e-14);
        checks.push_back(detail::make_check("kerr: n2 I_photon", est.n2 * est.i_photon, 3.30e-5,
                                            0.02 * 3.30e-5));
        checks.push_back(detail::make_check("kerr: phi (rad)", est.phi, 0.07, 0.05 * 0.07));
        checks.push_back(detail::make_check("kerr: photons for pi phase",
                                            static_cast<double>(est.photons_for_pi), 45.0, 1.0));
        const auto na = single_photon_phase(589e-9, 1.0, 1.0, 1.80e-5,
                                            2.0 * constants::pi * 1.30e6, 1.77e-10);
        checks.push_back(detail::make_check("kerr: n2 I_photon (Na reference)",
                                            na.n2 * na.i_photon, 4.47e-8, 0.02 * 4.47e-8));
    }
    return checks;
}

inline bool print_verification(std::ostream& os, const std::vector<Check>& checks) {
    bool all = true;
    os << std::left << std::setw(52) << "check" << std::setw(16) << "measured"
       << std::setw(16) << "expected" << std::setw(12) << "tolerance" << "result\n";
    for (const auto& c : checks) {
        os << std::left << std::setw(52) << c.name << std::setw(16) << std::setprecision(8)
           << c.measured << std::setw(16) << c.expected << std::setw(12) << c.tolerance
           << (c.pass ? "PASS" : "FAIL") << "\n";
        all = all && c.pass;
    }
    os << (all ? "all checks passed" : "VERIFICATION FAILED") << "\n";
    return all;
}

} // namespace slotsim
