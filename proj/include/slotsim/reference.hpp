#pragma once

// Independent brute-force references used to verify the production routines.
// Deliberately slow and algorithmically unrelated to the implementations they
// check: the Faddeeva reference uses series / continued-fraction / quadrature
// in extended precision, and the Green's-function reference differentiates the
// scalar kernel numerically instead of using the closed form.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "slotsim/constants.hpp"
#include "slotsim/geometry.hpp"

namespace slotsim::reference {

using complexl = std::complex<long double>;

/// Maclaurin series w(z) = sum (iz)^n / Gamma(n/2 + 1); accurate for |z| <= 4.
inline std::complex<double> faddeeva_series(std::complex<double> z) {
    const complexl iz(-static_cast<long double>(z.imag()), static_cast<long double>(z.real()));
    complexl sum(0.0L, 0.0L);
    complexl power(1.0L, 0.0L);
    for (int n = 0; n <= 170; ++n) {
        sum += power / std::tgammal(0.5L * n + 1.0L);
        power *= iz;
    }
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

/// Laplace continued fraction; accurate for |z| >= 5.5 in the upper half plane.
inline std::complex<double> faddeeva_cf(std::complex<double> z, int depth = 28) {
    const long double pil = 3.14159265358979323846264338327950288L;
    const complexl zl(static_cast<long double>(z.real()), static_cast<long double>(z.imag()));
    complexl f(0.0L, 0.0L);
    for (int n = depth; n >= 1; --n) f = (0.5L * n) / (zl - f);
    const complexl w = complexl(0.0L, 1.0L) / (std::sqrt(pil) * (zl - f));
    return {static_cast<double>(w.real()), static_cast<double>(w.imag())};
}

/// Trapezoid quadrature of w(z) = (i/pi) Int e^{-t^2}/(z - t) dt; needs Im z >= 1
/// so the integrand poles stay away from the real line.
inline std::complex<double> faddeeva_quadrature(std::complex<double> z) {
    if (z.imag() < 1.0)
        throw std::domain_error("faddeeva_quadrature: requires Im z >= 1");
    const long double h = 0.2L;
    const int nmax = 40;  // |t| <= 8
    const complexl zl(static_cast<long double>(z.real()), static_cast<long double>(z.imag()));
    complexl sum(0.0L, 0.0L);
    for (int k = -nmax; k <= nmax; ++k) {
        const long double t = k * h;
        sum += std::exp(-t * t) / (zl - t);
    }
    const long double pil = 3.14159265358979323846264338327950288L;
    const complexl w = complexl(0.0L, 1.0L) / pil * sum * h;
    return {static_cast<double>(w.real()), static_cast<double>(w.imag())};
}

/// Region-dispatched reference for the upper half plane. The annulus
/// 4 < |z| < 5.5 is covered only for Im z >= 1 (the reference grid is chosen
/// accordingly).
inline std::complex<double> faddeeva_reference(std::complex<double> z) {
    if (z.imag() < 0.0) throw std::domain_error("faddeeva_reference: Im z must be >= 0");
    const double r = std::abs(z);
    if (r <= 4.0) return faddeeva_series(z);
    if (r >= 5.5) return faddeeva_cf(z);
    return faddeeva_quadrature(z);
}

/// xx component of the dyadic Green's function via an 8th-order finite
/// difference of the scalar kernel g(r) = e^{iu}/(4 pi u), u = k|r|:
/// G_xx = g + (1/k^2) d^2 g/dx^2. Independent of the closed-form route.
inline std::complex<double> greens_xx_reference(const Vec3& pos_a, const Vec3& pos_b, double k) {
    const Vec3 d = pos_a - pos_b;
    const long double r = static_cast<long double>(d.norm());
    if (!(r > 0.0L)) throw std::domain_error("greens_xx_reference: coincident points");

    const long double pil = 3.14159265358979323846264338327950288L;
    auto scalar = [&](long double x) {
        const long double rr = std::sqrt(x * x + static_cast<long double>(d.y) * d.y +
                                         static_cast<long double>(d.z) * d.z);
        const long double u = static_cast<long double>(k) * rr;
        const complexl phase(std::cos(u), std::sin(u));
        return phase / (4.0L * pil * u);
    };

    // resolve both the 1/r curvature and the e^{iu} oscillation
    const long double h = std::min(0.02L * r, 0.1L / static_cast<long double>(k));
    static const long double c[4] = {8.0L / 5.0L, -1.0L / 5.0L, 8.0L / 315.0L, -1.0L / 560.0L};
    const long double x0 = static_cast<long double>(d.x);
    complexl second = -205.0L / 72.0L * scalar(x0);
    for (int j = 1; j <= 4; ++j)
        second += c[j - 1] * (scalar(x0 + j * h) + scalar(x0 - j * h));
    second /= h * h;

    const complexl g = scalar(x0) + second / (static_cast<long double>(k) * k);
    return {static_cast<double>(g.real()), static_cast<double>(g.imag())};
}

/// Analytic Hilbert pair: Im chi = gamma^2/(D^2 + gamma^2) maps to
/// Re chi = -gamma D/(D^2 + gamma^2) under the near-resonance Kramers-Kronig
/// transform Re chi(D) = (1/pi) P Int Im chi(D') / (D' - D) dD'.
inline double lorentzian_im(double delta, double gamma) {
    return gamma * gamma / (delta * delta + gamma * gamma);
}
inline double lorentzian_re(double delta, double gamma) {
    return -gamma * delta / (delta * delta + gamma * gamma);
}

} // namespace slotsim::reference
