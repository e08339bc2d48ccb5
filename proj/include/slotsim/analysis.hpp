#pragma once

// Lineshape analysis: Faddeeva function, Fano-modified Voigt profile and its
// weighted least-squares fit, transmission -> susceptibility, Kramers-Kronig
// reconstruction of the refractive index, and the Kerr / single-photon-phase
// estimate.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/spectrum.hpp"

namespace slotsim {

namespace detail {

/// Weideman rational approximation of w(z) on the closed upper half plane.
/// N = 64 terms: relative error ~1e-13, far inside the 1e-6 contract.
struct WeidemanTable {
    static constexpr int N = 64;
    double L;
    std::array<double, N + 1> a;

    WeidemanTable() {
        const int M = 2 * N;
        L = std::sqrt(N / std::sqrt(2.0));
        for (int n = 0; n <= N; ++n) {
            double s = 0.0;
            for (int k = -M + 1; k < M; ++k) {
                const double theta = k * constants::pi / M;
                const double t = L * std::tan(0.5 * theta);
                const double f = (L * L + t * t) * std::exp(-t * t);
                s += f * std::cos(n * theta);
            }
            a[static_cast<std::size_t>(n)] = s / (2.0 * M);
        }
    }
};

inline const WeidemanTable& weideman_table() {
    static const WeidemanTable table;
    return table;
}

inline std::complex<double> faddeeva_upper(std::complex<double> z) {
    const auto& tab = weideman_table();
    const std::complex<double> iz(-z.imag(), z.real());
    const std::complex<double> lmiz = tab.L - iz;
    const std::complex<double> Z = (tab.L + iz) / lmiz;
    std::complex<double> p = 0.0;
    for (int n = WeidemanTable::N; n >= 1; --n) p = p * Z + tab.a[static_cast<std::size_t>(n)];
    return 2.0 * p / (lmiz * lmiz) + (1.0 / std::sqrt(constants::pi)) / lmiz;
}

} // namespace detail

/// w(z) = e^{-z^2} erfc(-iz). Evaluated directly for Im(z) >= 0; the lower
/// half plane uses w(z) = 2 e^{-z^2} - conj(w(conj(z))).
inline std::complex<double> faddeeva(std::complex<double> z) {
    if (z.imag() >= 0.0) return detail::faddeeva_upper(z);
    return 2.0 * std::exp(-z * z) - std::conj(detail::faddeeva_upper(std::conj(z)));
}

// ---- Fano-Voigt profile ------------------------------------------------------

/// Voigt profile with a Fano asymmetry:
///   f(Delta) = 2 sqrt(ln2) A / ((q^2-1) omega_D sqrt(pi)) [ (q^2-1) Re(w) - 2q Im(w) ]
/// with w = w(x + iy), x = 2 sqrt(ln2) (Delta - s)/omega_D, y = sqrt(ln2) gamma_L/omega_D.
/// omega_D and gamma_L are FWHMs; the asymmetry vanishes for q -> inf.
inline double fano_voigt(double delta, double s, double amplitude, double q, double omega_d,
                         double gamma_l) {
    if (!(omega_d > 0.0)) throw std::domain_error("fano_voigt: omega_d must be positive");
    if (q * q == 1.0) throw std::domain_error("fano_voigt: q^2 = 1 is singular");
    const double sqrt_ln2 = std::sqrt(std::log(2.0));
    const double x = 2.0 * sqrt_ln2 * (delta - s) / omega_d;
    const double y = sqrt_ln2 * gamma_l / omega_d;
    const std::complex<double> w = faddeeva({x, y});
    // with u = 1/q: f = C [Re(w) - 2u/(1-u^2) Im(w)], C = 2 sqrt(ln2) A/(omega_D sqrt(pi))
    const double u = std::isinf(q) ? 0.0 : 1.0 / q;
    const double c = 2.0 * sqrt_ln2 * amplitude / (omega_d * std::sqrt(constants::pi));
    return c * (w.real() - (2.0 * u / (1.0 - u * u)) * w.imag());
}

/// Fitted Fano-Voigt parameters. The covariance is over the internal
/// parameter vector (s, A, 1/q, gamma_L) from the final Jacobian.
struct FitResult {
    double shift = 0.0;       // s, same unit as the detuning grid
    double amplitude = 0.0;   // A
    double q = std::numeric_limits<double>::infinity();
    double omega_d = 0.0;     // fixed Gaussian FWHM input
    double gamma_l = 0.0;     // Lorentzian FWHM
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;

    double shift_err() const { return std::sqrt(std::max(0.0, covariance(0, 0))); }
    double fwhm_lorentz_err() const { return std::sqrt(std::max(0.0, covariance(3, 3))); }
};

struct FitInit {
    double shift = 0.0;
    double amplitude = 0.0;
    double inv_q = 0.0;
    double gamma_l = 0.0;
};

namespace detail {

inline double fano_voigt_u(double delta, double s, double amplitude, double u, double omega_d,
                           double gamma_l) {
    const double sqrt_ln2 = std::sqrt(std::log(2.0));
    const double x = 2.0 * sqrt_ln2 * (delta - s) / omega_d;
    const double y = sqrt_ln2 * gamma_l / omega_d;
    const std::complex<double> w = faddeeva({x, y});
    const double c = 2.0 * sqrt_ln2 * amplitude / (omega_d * std::sqrt(constants::pi));
    return c * (w.real() - (2.0 * u / (1.0 - u * u)) * w.imag());
}

/// Lorentzian FWHM from a measured Voigt FWHM (Olivero-Longbothum inverse).
inline double gamma_l_from_total_fwhm(double fwhm, double omega_d) {
    // fwhm ~= 0.5346 gL + sqrt(0.2166 gL^2 + wD^2)  =>  solve for gL
    const double a = 0.5346, b = 0.2166;
    // (fwhm - a gL)^2 = b gL^2 + wD^2
    const double A = a * a - b;
    const double B = -2.0 * fwhm * a;
    const double C = fwhm * fwhm - omega_d * omega_d;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return 0.0;
    const double gl = (-B - std::sqrt(disc)) / (2.0 * A);
    return std::max(0.0, gl);
}

} // namespace detail

/// Weighted nonlinear least squares of the Fano-Voigt profile over
/// (shift, amplitude, 1/q, gamma_L) with the Gaussian FWHM fixed.
/// Weights are inverse standard errors when available.
inline FitResult fit_lineshape(const Spectrum& spectrum, double omega_d,
                               std::optional<FitInit> init = std::nullopt) {
    spectrum.validate(false);
    const std::size_t n = spectrum.detunings.size();
    if (n < 8) throw std::invalid_argument("fit_lineshape: need at least 8 points");
    if (!(omega_d > 0.0)) throw std::domain_error("fit_lineshape: omega_d must be positive");

    const auto& xs = spectrum.detunings;
    const auto& ys = spectrum.absorption;

    const double ymax = *std::max_element(ys.begin(), ys.end());
    const double ymin = *std::min_element(ys.begin(), ys.end());
    if (!(ymax - ymin > 0.0))
        throw std::invalid_argument("fit_lineshape: degenerate (flat) data");

    // weights: inverse variance with a floor; unweighted if errors absent
    std::vector<double> w(n, 1.0);
    if (!spectrum.std_err.empty()) {
        double emax = *std::max_element(spectrum.std_err.begin(), spectrum.std_err.end());
        if (emax > 0.0) {
            const double floor = 1e-3 * emax;
            for (std::size_t i = 0; i < n; ++i)
                w[i] = 1.0 / std::max(spectrum.std_err[i], floor);
        }
    }

    const double grid_span = xs.back() - xs.front();
    auto residuals = [&](const Eigen::Vector4d& q) {
        Eigen::VectorXd r(n);
        for (std::size_t i = 0; i < n; ++i)
            r(static_cast<Eigen::Index>(i)) =
                w[i] * (detail::fano_voigt_u(xs[i], q(0), q(1), q(2), omega_d, q(3)) - ys[i]);
        return r;
    };
    auto clamp_params = [&](Eigen::Vector4d& q) {
        q(2) = std::clamp(q(2), -0.9, 0.9);
        q(3) = std::max(q(3), 0.0);
        q(0) = std::clamp(q(0), xs.front() - grid_span, xs.back() + grid_span);
    };

    struct LmOutcome {
        Eigen::Vector4d p;
        double chi2 = 0.0;
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Identity();
        int iterations = 0;
        bool converged = false;
    };

    auto levenberg_marquardt = [&](Eigen::Vector4d p) {
        clamp_params(p);
        LmOutcome o;
        Eigen::VectorXd r = residuals(p);
        double chi2 = r.squaredNorm();
        double lambda = 1e-3;
        int stagnant = 0;
        for (o.iterations = 1; o.iterations <= 500; ++o.iterations) {
            Eigen::MatrixXd jac(n, 4);
            for (int c = 0; c < 4; ++c) {
                const double scale = std::max({std::abs(p(c)), 1e-3 * grid_span, 1e-12});
                const double h = 1e-6 * scale;
                Eigen::Vector4d pp = p, pm = p;
                pp(c) += h;
                pm(c) -= h;
                clamp_params(pp);
                clamp_params(pm);
                const double dh = pp(c) - pm(c);
                jac.col(c) = (residuals(pp) - residuals(pm)) / (dh != 0.0 ? dh : h);
            }
            const Eigen::Matrix4d jtj = jac.transpose() * jac;
            const Eigen::Vector4d g = jac.transpose() * r;
            o.jtj = jtj;

            bool stepped = false;
            for (int attempt = 0; attempt < 20 && !stepped; ++attempt) {
                Eigen::Matrix4d a = jtj;
                a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
                const Eigen::Vector4d step = a.ldlt().solve(-g);
                Eigen::Vector4d pn = p + step;
                clamp_params(pn);
                const Eigen::VectorXd rn = residuals(pn);
                const double chi2n = rn.squaredNorm();
                if (chi2n <= chi2) {
                    double rel_change = 0.0;
                    for (int c = 0; c < 4; ++c) {
                        const double scale = std::max(std::abs(p(c)), 1e-12);
                        rel_change = std::max(rel_change, std::abs(pn(c) - p(c)) / scale);
                    }
                    const double drop = chi2 - chi2n;
                    p = pn;
                    r = rn;
                    chi2 = chi2n;
                    lambda = std::max(lambda * 0.4, 1e-12);
                    stepped = true;
                    // relative-parameter-change criterion, evaluated only in the
                    // near-Gauss-Newton regime so damped micro-steps do not
                    // masquerade as convergence; chi^2 stagnation over several
                    // iterations also terminates
                    if (rel_change < 1e-8 && lambda <= 1e-2) o.converged = true;
                    stagnant = drop <= 1e-12 * (chi2 + 1e-300) ? stagnant + 1 : 0;
                    if (stagnant >= 3) o.converged = true;
                } else {
                    lambda *= 10.0;
                }
            }
            if (o.converged || !stepped) {
                if (!stepped) o.converged = true;  // no downhill direction: stationary
                break;
            }
        }
        o.p = p;
        o.chi2 = chi2;
        return o;
    };

    // default start: peak location, trapezoid area, symmetric, width from FWHM
    std::vector<Eigen::Vector4d> starts;
    if (init) {
        starts.push_back(Eigen::Vector4d(init->shift, init->amplitude, init->inv_q,
                                         init->gamma_l));
    } else {
        const std::size_t imax = static_cast<std::size_t>(
            std::max_element(ys.begin(), ys.end()) - ys.begin());
        double area = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            area += 0.5 * (ys[i] + ys[i + 1] - 2.0 * ymin) * (xs[i + 1] - xs[i]);
        const double half = ymin + 0.5 * (ymax - ymin);
        double lo = xs.front(), hi = xs.back();
        for (std::size_t i = imax; i-- > 0;)
            if (ys[i] < half) { lo = xs[i]; break; }
        for (std::size_t i = imax; i < n; ++i)
            if (ys[i] < half) { hi = xs[i]; break; }
        const double fwhm = std::max(hi - lo, omega_d * 0.5);
        const double gl0 = detail::gamma_l_from_total_fwhm(fwhm, omega_d);
        // multi-start over the asymmetry: the Fano term creates local minima
        for (double u0 : {0.0, 0.3, -0.3})
            starts.push_back(Eigen::Vector4d(xs[imax], area, u0, gl0));
    }

    LmOutcome best;
    bool have_best = false;
    int total_iterations = 0;
    for (const auto& p0 : starts) {
        const LmOutcome o = levenberg_marquardt(p0);
        total_iterations += o.iterations;
        if (!have_best || o.chi2 < best.chi2) {
            best = o;
            have_best = true;
        }
        if (best.converged && best.chi2 <= 1e-20) break;
    }

    FitResult out;
    out.omega_d = omega_d;
    out.iterations = total_iterations;
    out.converged = best.converged;
    out.shift = best.p(0);
    out.amplitude = best.p(1);
    out.q = best.p(2) == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / best.p(2);
    out.gamma_l = best.p(3);
    out.residual_norm = std::sqrt(best.chi2);
    const double dof = static_cast<double>(n) - 4.0;
    const double var = dof > 0.0 ? best.chi2 / dof : 0.0;
    Eigen::Matrix4d jtj_reg = best.jtj;
    jtj_reg.diagonal() += Eigen::Vector4d::Constant(1e-300);
    out.covariance = jtj_reg.inverse() * var;
    return out;
}

// ---- susceptibility / Kramers-Kronig / Kerr ----------------------------------

/// Im chi from transmission T = exp(-n_eff k L Im chi).
inline std::vector<double> susceptibility_from_transmission(std::span<const double> transmission,
                                                            double n_eff, double k, double L,
                                                            int* clipped = nullptr) {
    if (!(n_eff > 0.0 && k > 0.0 && L > 0.0))
        throw std::domain_error("susceptibility_from_transmission: non-positive geometry");
    std::vector<double> im_chi(transmission.size());
    const double scale = n_eff * k * L;
    int clips = 0;
    for (std::size_t i = 0; i < transmission.size(); ++i) {
        double t = transmission[i];
        if (!(t > 0.0)) throw std::domain_error("transmission must be positive");
        if (t > 1.0) { t = 1.0; ++clips; }
        im_chi[i] = -std::log(t) / scale;
    }
    if (clipped) *clipped = clips;
    return im_chi;
}

struct KKResult {
    std::vector<double> re_chi;
    bool edge_warning = false;        // Im chi not decayed below 1% of peak at an edge
    double edge_fraction = 0.0;       // worst edge value / peak
};

/// Near-resonance Kramers-Kronig: principal-value Hilbert transform on a
/// uniform detuning grid. The singular cell is handled by symmetric pairing
/// plus the local derivative correction; a cosine taper is applied over the
/// outer 5% of the grid.
inline KKResult kramers_kronig(std::span<const double> im_chi, double grid_step) {
    const std::size_t n = im_chi.size();
    if (n < 8) throw std::invalid_argument("kramers_kronig: need at least 8 points");
    if (!(grid_step > 0.0)) throw std::domain_error("kramers_kronig: grid step must be positive");

    KKResult out;
    double peak = 0.0;
    for (double v : im_chi) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        out.edge_fraction =
            std::max(std::abs(im_chi.front()), std::abs(im_chi.back())) / peak;
        out.edge_warning = out.edge_fraction > 0.01;
    }

    // cosine taper over the outer 5%
    std::vector<double> f(im_chi.begin(), im_chi.end());
    const std::size_t ramp = std::max<std::size_t>(2, n / 20);
    for (std::size_t i = 0; i < ramp; ++i) {
        const double wgt = 0.5 * (1.0 - std::cos(constants::pi * (static_cast<double>(i) + 0.5) /
                                                 static_cast<double>(ramp)));
        f[i] *= wgt;
        f[n - 1 - i] *= wgt;
    }

    out.re_chi.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum += f[j] / (static_cast<double>(j) - static_cast<double>(i));
        }
        // omitted singular cell contributes f'(x_i) * h to the PV integral
        double deriv;
        if (i == 0) deriv = f[1] - f[0];
        else if (i == n - 1) deriv = f[n - 1] - f[n - 2];
        else deriv = 0.5 * (f[i + 1] - f[i - 1]);
        out.re_chi[i] = (sum + deriv) / constants::pi;
    }
    return out;
}

/// n = sqrt(1 + Re chi), pointwise.
inline std::vector<double> refractive_index(std::span<const double> re_chi) {
    std::vector<double> out(re_chi.size());
    for (std::size_t i = 0; i < re_chi.size(); ++i) {
        if (re_chi[i] <= -1.0) throw std::domain_error("refractive_index: Re chi <= -1");
        out[i] = std::sqrt(1.0 + re_chi[i]);
    }
    return out;
}

/// Kerr coefficient n2 = (s / I) |dn/dDelta|; s and 1/slope share the unit.
inline double kerr_coefficient(double shift, double intensity, double slope) {
    if (!(intensity > 0.0)) throw std::domain_error("kerr_coefficient: intensity must be positive");
    return shift * std::abs(slope) / intensity;
}

struct KerrEstimate {
    double n2 = 0.0;            // m^2/W
    double slope = 0.0;         // |dn/dDelta|, 1/(rad/s)
    double i_photon = 0.0;      // W/m^2
    double phi = 0.0;           // rad
    long photons_for_pi = 0;    // ceil(pi / phi)
};

/// Single-photon phase phi = k_eff L n2 I_photon with
/// I_photon = hbar omega / (T A_eff) and T the inverse lineshift bandwidth.
/// The bandwidth s is angular (rad/s); T = 1/(s/2pi) as an ordinary frequency.
inline KerrEstimate single_photon_phase(double lambda, double n_eff, double L, double n2,
                                        double bandwidth, double a_eff, double slope = 0.0) {
    if (!(lambda > 0.0 && n_eff > 0.0 && L > 0.0 && bandwidth > 0.0 && a_eff > 0.0))
        throw std::domain_error("single_photon_phase: inputs must be positive");
    if (n2 < 0.0) throw std::domain_error("single_photon_phase: n2 must be non-negative");
    KerrEstimate out;
    out.n2 = n2;
    out.slope = slope;
    const double omega = 2.0 * constants::pi * constants::c_light / lambda;
    const double nu = bandwidth / (2.0 * constants::pi);  // ordinary-frequency bandwidth
    out.i_photon = constants::hbar * omega * nu / a_eff;
    const double k_eff = n_eff * 2.0 * constants::pi / lambda;
    out.phi = k_eff * L * n2 * out.i_photon;
    out.photons_for_pi = out.phi > 0.0
                             ? static_cast<long>(std::ceil(constants::pi / out.phi))
                             : 0;
    return out;
}

} // namespace slotsim
