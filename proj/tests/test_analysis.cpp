#include <catch_amalgamated.hpp>

#include <random>

#include "slotsim/analysis.hpp"
#include "slotsim/reference.hpp"

using namespace slotsim;
using Catch::Approx;

TEST_CASE("faddeeva special values") {
    CHECK(faddeeva({0, 0}).real() == Approx(1.0).epsilon(1e-14));
    CHECK(faddeeva({0, 0}).imag() == Approx(0.0).margin(1e-14));
    // w(i) = e erfc(1)
    CHECK(faddeeva({0, 1}).real() == Approx(0.42758357615580700441).epsilon(1e-12));
}

TEST_CASE("faddeeva vs brute-force reference over |z| <= 20") {
    double worst = 0.0;
    for (double x : {0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 3.9, 5.5, 7.0, 12.0, 20.0, -1.5, -8.0}) {
        for (double y : {0.0, 1e-4, 0.01, 0.3, 1.0, 4.0, 15.0}) {
            const double r = std::hypot(x, y);
            if (r > 4.0 && r < 5.5) continue;  // reference grid avoids this band near the axis
            if (r > 20.5) continue;
            const auto ref = reference::faddeeva_reference({x, y});
            const auto imp = faddeeva({x, y});
            worst = std::max(worst, std::abs(imp - ref) / std::abs(ref));
        }
    }
    for (double x : {3.2, 4.0, 4.4, -4.4, 5.0}) {
        for (double y : {1.0, 2.0, 3.0}) {
            const auto ref = reference::faddeeva_reference({x, y});
            const auto imp = faddeeva({x, y});
            worst = std::max(worst, std::abs(imp - ref) / std::abs(ref));
        }
    }
    INFO("worst relative error " << worst);
    CHECK(worst <= 1e-6);
    CHECK(worst <= 1e-10);  // the rational approximation is far inside the contract
}

TEST_CASE("faddeeva symmetries") {
    // w(-conj z) = conj(w(z))
    for (double x : {0.3, 1.7, 6.0, 14.0}) {
        for (double y : {0.0, 0.2, 2.0}) {
            const auto a = faddeeva({-x, y});
            const auto b = std::conj(faddeeva({x, y}));
            CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
        }
    }
    // real axis: Re even, Im odd
    for (double x : {0.4, 1.1, 2.7}) {
        CHECK(faddeeva({x, 0}).real() == Approx(faddeeva({-x, 0}).real()).epsilon(1e-13));
        CHECK(faddeeva({x, 0}).imag() == Approx(-faddeeva({-x, 0}).imag()).epsilon(1e-13));
    }
    // lower half plane via the reflection formula
    const std::complex<double> z{0.7, -0.4};
    const auto direct = faddeeva(z);
    const auto reflected = 2.0 * std::exp(-z * z) - std::conj(faddeeva(std::conj(z)));
    CHECK(std::abs(direct - reflected) < 1e-12);
}

TEST_CASE("fano_voigt limits") {
    const double wd = 2.0, gl = 1.3, A = 0.8, s = 0.4;

    SECTION("q -> infinity recovers the symmetric Voigt") {
        const double sqrt_ln2 = std::sqrt(std::log(2.0));
        for (double d : {-3.0, -0.5, 0.4, 2.0, 7.0}) {
            const double x = 2.0 * sqrt_ln2 * (d - s) / wd;
            const double y = sqrt_ln2 * gl / wd;
            const double voigt =
                2.0 * sqrt_ln2 * A / (wd * std::sqrt(constants::pi)) * faddeeva({x, y}).real();
            CHECK(fano_voigt(d, s, A, 1e8, wd, gl) == Approx(voigt).epsilon(1e-6));
            CHECK(fano_voigt(d, s, A, std::numeric_limits<double>::infinity(), wd, gl) ==
                  Approx(voigt).epsilon(1e-14));
        }
    }

    SECTION("gamma_l = 0, q -> inf: pure Gaussian of FWHM omega_d") {
        const double inf = std::numeric_limits<double>::infinity();
        const double peak = fano_voigt(s, s, A, inf, wd, 0.0);
        CHECK(fano_voigt(s + wd / 2.0, s, A, inf, wd, 0.0) == Approx(0.5 * peak).epsilon(1e-10));
        CHECK(fano_voigt(s - wd / 2.0, s, A, inf, wd, 0.0) == Approx(0.5 * peak).epsilon(1e-10));
        // Gaussian peak value 2 sqrt(ln2 / pi) A / wd
        CHECK(peak == Approx(2.0 * std::sqrt(std::log(2.0) / constants::pi) * A / wd)
                          .epsilon(1e-12));
    }

    SECTION("profile is even about delta = s for q -> inf") {
        const double inf = std::numeric_limits<double>::infinity();
        for (double d : {0.3, 1.1, 4.0})
            CHECK(fano_voigt(s + d, s, A, inf, wd, gl) ==
                  Approx(fano_voigt(s - d, s, A, inf, wd, gl)).epsilon(1e-12));
    }

    SECTION("area is q-independent in the large-q family (normalization)") {
        auto area = [&](double q) {
            double sum = 0.0;
            const int n = 40001;
            const double span = 400.0;  // +- 200 FWHM
            const double h = span / (n - 1);
            for (int i = 0; i < n; ++i) {
                const double d = s - span / 2.0 + i * h;
                sum += fano_voigt(d, s, A, q, wd, gl) * h;
            }
            return sum;
        };
        const double a6 = area(1e6);
        const double a8 = area(1e8);
        CHECK(a6 == Approx(A).epsilon(1e-2));  // Lorentzian wings truncate slowly
        CHECK(a6 == Approx(a8).epsilon(1e-4));
    }

    CHECK_THROWS_AS(fano_voigt(0.0, 0.0, 1.0, 1.0, 2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(fano_voigt(0.0, 0.0, 1.0, -1.0, 2.0, 1.0), std::domain_error);
}

namespace {

Spectrum synthetic_spectrum(double s, double A, double q, double wd, double gl,
                            double noise_sigma, unsigned seed, int n = 201, double span = 60.0) {
    Spectrum spec;
    std::mt19937 gen(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (int i = 0; i < n; ++i) {
        const double d = -span / 2.0 + span * i / (n - 1);
        spec.detunings.push_back(d);
        double y = fano_voigt(d, s, A, q, wd, gl);
        if (noise_sigma > 0.0) y += noise(gen);
        spec.absorption.push_back(y);
        spec.std_err.push_back(noise_sigma > 0.0 ? noise_sigma : 0.0);
    }
    return spec;
}

} // namespace

TEST_CASE("fit_lineshape noiseless roundtrip") {
    const double wd = 2.0;
    SECTION("symmetric line") {
        const auto spec = synthetic_spectrum(3.0, 0.02, 1e9, wd, 4.0, 0.0, 1);
        const auto fit = fit_lineshape(spec, wd);
        REQUIRE(fit.converged);
        CHECK(fit.shift == Approx(3.0).epsilon(1e-6));
        CHECK(fit.amplitude == Approx(0.02).epsilon(1e-6));
        CHECK(fit.gamma_l == Approx(4.0).epsilon(1e-6));
        CHECK(std::abs(1.0 / fit.q) < 1e-6);
    }
    SECTION("asymmetric line") {
        const auto spec = synthetic_spectrum(-2.0, 0.05, 4.0, wd, 3.0, 0.0, 2);
        const auto fit = fit_lineshape(spec, wd);
        REQUIRE(fit.converged);
        CHECK(fit.shift == Approx(-2.0).epsilon(1e-6));
        CHECK(fit.amplitude == Approx(0.05).epsilon(1e-6));
        CHECK(fit.gamma_l == Approx(3.0).epsilon(1e-6));
        CHECK(fit.q == Approx(4.0).epsilon(1e-5));
    }
}

TEST_CASE("fit_lineshape with noise recovers the shift within 3 sigma") {
    // Monte-Carlo over noise realizations establishes the expected spread:
    // 1% of the peak on 200 points gives an empirical sigma_s near 0.05,
    // so |s - s_true| < 0.15 is the 3 sigma band.
    const double wd = 2.0, gl = 4.0, A = 0.05, s_true = 5.0;
    const double peak = fano_voigt(s_true, s_true, A, 1e9, wd, gl);
    int within = 0;
    const int reps = 100;
    std::vector<double> shifts;
    for (int rep = 0; rep < reps; ++rep) {
        const auto spec =
            synthetic_spectrum(s_true, A, 1e9, wd, gl, 0.01 * peak, 100 + rep, 200);
        const auto fit = fit_lineshape(spec, wd);
        if (!fit.converged) continue;
        shifts.push_back(fit.shift);
        if (std::abs(fit.shift - s_true) < 0.15) ++within;
    }
    REQUIRE(shifts.size() >= 95);
    double mean = 0.0, var = 0.0;
    for (double v : shifts) mean += v;
    mean /= static_cast<double>(shifts.size());
    for (double v : shifts) var += (v - mean) * (v - mean);
    const double sigma_s = std::sqrt(var / (static_cast<double>(shifts.size()) - 1.0));
    INFO("empirical sigma_s = " << sigma_s);
    CHECK(std::abs(mean - s_true) < 3.0 * sigma_s / std::sqrt(static_cast<double>(shifts.size())) + 0.01);
    CHECK(sigma_s < 0.08);
    CHECK(within >= static_cast<int>(0.95 * static_cast<double>(shifts.size())));
}

TEST_CASE("fit on symmetric data gives 1/q consistent with zero") {
    const double wd = 2.0;
    const auto spec = synthetic_spectrum(0.0, 0.05, 1e9, wd, 3.0, 5e-4 * 0.05, 7);
    const auto fit = fit_lineshape(spec, wd);
    REQUIRE(fit.converged);
    const double u = 1.0 / fit.q;
    const double u_err = std::sqrt(std::max(fit.covariance(2, 2), 1e-30));
    CHECK(std::abs(u) < 3.0 * u_err + 1e-6);
}

TEST_CASE("fit_lineshape rejects degenerate input") {
    Spectrum flat;
    for (int i = 0; i < 32; ++i) {
        flat.detunings.push_back(i);
        flat.absorption.push_back(0.25);
        flat.std_err.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_lineshape(flat, 1.0), std::invalid_argument);

    Spectrum tiny;
    tiny.detunings = {0, 1, 2};
    tiny.absorption = {0, 1, 0};
    CHECK_THROWS_AS(fit_lineshape(tiny, 1.0), std::invalid_argument);
}

TEST_CASE("susceptibility from transmission") {
    const double n_eff = 2.53, lam = 1529e-9, L = 200e-6;
    const double k = 2.0 * constants::pi / lam;
    CHECK(n_eff * k * L == Approx(2079.6).epsilon(1e-3));

    std::vector<double> T = {1.0, std::exp(-1.0), 0.92};
    const auto chi = susceptibility_from_transmission(T, 1.0, 1.0, 1.0);
    CHECK(chi[0] == 0.0);
    CHECK(chi[1] == Approx(1.0).epsilon(1e-12));

    const auto chi2 = susceptibility_from_transmission(std::vector<double>{0.92}, n_eff, k, L);
    CHECK(chi2[0] == Approx(4.01e-5).epsilon(2e-3));

    CHECK_THROWS_AS(susceptibility_from_transmission(std::vector<double>{0.0}, 1.0, 1.0, 1.0),
                    std::domain_error);
    int clipped = 0;
    susceptibility_from_transmission(std::vector<double>{1.2}, 1.0, 1.0, 1.0, &clipped);
    CHECK(clipped == 1);
}

TEST_CASE("kramers_kronig on the analytic Lorentzian pair") {
    const int n = 2001;
    const double span = 80.0, gamma = 1.0;
    const double h = span / (n - 1);
    std::vector<double> im(n), re_exact(n), delta(n);
    for (int i = 0; i < n; ++i) {
        delta[i] = -span / 2.0 + i * h;
        im[i] = reference::lorentzian_im(delta[i], gamma);
        re_exact[i] = reference::lorentzian_re(delta[i], gamma);
    }
    const auto kk = kramers_kronig(im, h);
    CHECK(!kk.edge_warning);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(delta[i]) > 0.4 * span) continue;  // interior
        worst = std::max(worst, std::abs(kk.re_chi[static_cast<std::size_t>(i)] - re_exact[i]));
    }
    CHECK(worst < 0.01);  // < 1% of the unit peak

    SECTION("zero maps to zero and linearity holds") {
        std::vector<double> zero(n, 0.0);
        const auto z = kramers_kronig(zero, h);
        for (double v : z.re_chi) CHECK(v == 0.0);

        std::vector<double> f2(n);
        for (int i = 0; i < n; ++i) f2[i] = reference::lorentzian_im(delta[i] - 5.0, 2.0);
        std::vector<double> combo(n);
        for (int i = 0; i < n; ++i) combo[i] = 2.0 * im[i] + 0.5 * f2[i];
        const auto ka = kramers_kronig(im, h);
        const auto kb = kramers_kronig(f2, h);
        const auto kc = kramers_kronig(combo, h);
        for (int i = 0; i < n; i += 100)
            CHECK(kc.re_chi[static_cast<std::size_t>(i)] ==
                  Approx(2.0 * ka.re_chi[static_cast<std::size_t>(i)] +
                         0.5 * kb.re_chi[static_cast<std::size_t>(i)])
                      .margin(1e-12));
    }

    SECTION("double transform returns -Im chi within interior 2%") {
        // H[H[f]] = -f for decaying f
        const auto second = kramers_kronig(kk.re_chi, h);
        for (int i = 0; i < n; i += 50) {
            if (std::abs(delta[i]) > 0.25 * span) continue;
            CHECK(second.re_chi[static_cast<std::size_t>(i)] ==
                  Approx(-im[i]).margin(0.02));
        }
    }

    SECTION("insufficient edge decay warns") {
        std::vector<double> wide(n);
        for (int i = 0; i < n; ++i) wide[i] = reference::lorentzian_im(delta[i], 15.0);
        CHECK(kramers_kronig(wide, h).edge_warning);
    }
}

TEST_CASE("refractive index") {
    const std::vector<double> re = {0.0, 3.0, -0.19};
    const auto n = refractive_index(re);
    CHECK(n[0] == 1.0);
    CHECK(n[1] == 2.0);
    CHECK(n[2] == Approx(0.9).epsilon(1e-12));
    CHECK_THROWS_AS(refractive_index(std::vector<double>{-1.0}), std::domain_error);
}

TEST_CASE("kerr coefficient formula") {
    CHECK(kerr_coefficient(0.0, 1.0, 1.0) == 0.0);
    const double s = 100e6, I = 30.8, slope = 3.09e-8 / 1e6;  // ordinary-frequency units
    const double n2 = kerr_coefficient(s, I, slope);
    CHECK(kerr_coefficient(s, 2.0 * I, slope) == Approx(0.5 * n2).epsilon(1e-14));
    // same product in angular units
    CHECK(kerr_coefficient(2.0 * constants::pi * s, I, slope / (2.0 * constants::pi)) ==
          Approx(n2).epsilon(1e-14));
    // the formula applied to the reported inputs gives ~1.0e-7 m^2/W
    CHECK(n2 == Approx(1.003e-7).epsilon(1e-3));
    CHECK_THROWS_AS(kerr_coefficient(1.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("single-photon phase pipeline") {
    // reference inputs: lambda = 1529 nm, n_eff = 2.53, L = 200 um,
    // n2 = 1.98e-7 m^2/W, s = 100 MHz, A_eff = 7.68e-14 m^2
    const double s_rad = 2.0 * constants::pi * 100e6;
    const auto est = single_photon_phase(1529e-9, 2.53, 200e-6, 1.98e-7, s_rad, 7.68e-14);
    CHECK(est.i_photon == Approx(169.16).epsilon(1e-3));
    CHECK(est.n2 * est.i_photon == Approx(3.30e-5).epsilon(0.02));
    CHECK(est.phi == Approx(0.07).epsilon(0.05));
    CHECK(est.photons_for_pi >= 44);
    CHECK(est.photons_for_pi <= 46);

    // sodium comparison: n2 = 1.80e-5 m^2/W, T = 1/(1.30 MHz), A_eff = 1.77e-10 m^2
    const auto na = single_photon_phase(589e-9, 1.0, 1.0, 1.80e-5,
                                        2.0 * constants::pi * 1.30e6, 1.77e-10);
    CHECK(na.n2 * na.i_photon == Approx(4.47e-8).epsilon(0.02));

    CHECK(single_photon_phase(1529e-9, 2.53, 200e-6, 0.0, s_rad, 7.68e-14).phi == 0.0);
    CHECK_THROWS_AS(single_photon_phase(0.0, 2.53, 200e-6, 1e-7, s_rad, 7.68e-14),
                    std::domain_error);
}
