#pragma once

// Free-space dyadic Green's tensor, effective 1D waveguide Green's function,
// their perturbative sum, pairwise coupling-rate matrices and Purcell factors.
//
// Normalization: dimensionless Green's functions with Im(G_FS) -> 1/(6 pi)
// at coincidence. Dipoles are polarized along x (the slot's strong-confinement
// axis); only the xx component feeds the dynamics.

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/geometry.hpp"
#include "slotsim/mode.hpp"

namespace slotsim {

using complexd = std::complex<double>;

/// Full dyadic free-space tensor
///   G_ij = e^{iu}/(4 pi u^3) [ (u^2 + iu - 1) delta_ij + (3 - 3iu - u^2) rhat_i rhat_j ],
/// u = k R. Singular-input error at coincidence.
inline Eigen::Matrix3cd greens_free_space_tensor(const Vec3& pos_a, const Vec3& pos_b, double k) {
    const Vec3 d = pos_a - pos_b;
    const double r = d.norm();
    if (!(r > 0.0)) throw std::domain_error("greens_free_space: coincident points");
    const double u = k * r;
    const complexd iu(0.0, u);
    const complexd pre = std::exp(iu) / (4.0 * constants::pi * u * u * u);
    const complexd diag = pre * (complexd(u * u - 1.0, u));
    const complexd dyad = pre * (complexd(3.0 - u * u, -3.0 * u));
    const double inv_r = 1.0 / r;
    const double rh[3] = {d.x * inv_r, d.y * inv_r, d.z * inv_r};
    Eigen::Matrix3cd g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            g(i, j) = (i == j ? diag : complexd{}) + dyad * (rh[i] * rh[j]);
    return g;
}

/// xx component only (dipole axis = x).
inline complexd greens_free_space_xx(const Vec3& pos_a, const Vec3& pos_b, double k) {
    const Vec3 d = pos_a - pos_b;
    const double r = d.norm();
    if (!(r > 0.0)) throw std::domain_error("greens_free_space: coincident points");
    const double u = k * r;
    const complexd pre = std::exp(complexd(0.0, u)) / (4.0 * constants::pi * u * u * u);
    const double cx = d.x / r;
    return pre * (complexd(u * u - 1.0, u) + complexd(3.0 - u * u, -3.0 * u) * (cx * cx));
}

/// Effective 1D waveguide Green's function
///   G_WG = i (Gamma_1D^{ab}/gamma0) e^{i beta0 |z_a - z_b|},
/// with Gamma_1D^{ab} = sqrt(Gamma_1D^a Gamma_1D^b) from the transverse map.
inline complexd greens_waveguide(const Vec3& atom_a, const Vec3& atom_b, const ModeProfile& mode) {
    if (!mode.contains(atom_a.x, atom_a.y) || !mode.contains(atom_b.x, atom_b.y))
        throw std::domain_error("greens_waveguide: position outside mode-profile domain");
    const double g1a = mode.gamma_1d_over_gamma0(atom_a.x, atom_a.y);
    const double g1b = mode.gamma_1d_over_gamma0(atom_b.x, atom_b.y);
    const double rate = std::sqrt(g1a * g1b);
    const double phase = mode.beta0() * std::abs(atom_a.z - atom_b.z);
    return complexd(0.0, rate) * std::exp(complexd(0.0, phase));
}

/// Perturbative total: G_total = G_FS + G_WG (mode == nullptr means vacuum).
inline complexd greens_total(const Vec3& atom_a, const Vec3& atom_b, double k,
                             const ModeProfile* mode) {
    complexd g = greens_free_space_xx(atom_a, atom_b, k);
    if (mode != nullptr) g += greens_waveguide(atom_a, atom_b, *mode);
    return g;
}

/// PF = 1 + 6 pi Gamma_1D / gamma0.
inline double purcell_factor(double gamma_1d_self, double gamma0) {
    if (gamma_1d_self < 0.0) throw std::domain_error("purcell_factor: negative rate");
    return 1.0 + 6.0 * constants::pi * gamma_1d_self / gamma0;
}

/// Pairwise dispersive (J) and dissipative (Gamma) exchange rates plus the
/// per-atom total decay Gamma0 * PF(x, y).
struct CouplingMatrices {
    Eigen::MatrixXd J;       // rad/s, zero diagonal
    Eigen::MatrixXd Gamma;   // rad/s, diagonal = per-atom total decay
    Eigen::VectorXd decay;   // rad/s, Gamma0 * PF(x_m, y_m)
};

struct CouplingOptions {
    double exclusion_radius = 0.0;  // pairs closer than this contribute zero
    bool waveguide = true;          // include G_WG (Purcell + infinite-range exchange)
    bool check_psd = false;         // eigen-check Gamma and clip tiny negatives
};

/// Pairs closer than lambda/50 are excluded; beyond that the bare 1/R^3
/// exchange exceeds the RK4 stability budget of the ensemble integrator
/// at the default time step.
inline double default_exclusion_radius(double lambda_probe) { return lambda_probe / 50.0; }

inline CouplingMatrices coupling_matrices(std::span<const Vec3> positions, double k,
                                          const ModeProfile* mode, double gamma0,
                                          const CouplingOptions& opts = {}) {
    const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
    if (n < 1) throw std::invalid_argument("coupling_matrices: need at least one atom");
    CouplingMatrices cm;
    cm.J = Eigen::MatrixXd::Zero(n, n);
    cm.Gamma = Eigen::MatrixXd::Zero(n, n);
    cm.decay = Eigen::VectorXd::Constant(n, gamma0);

    const bool with_wg = opts.waveguide && mode != nullptr;
    std::vector<double> g1d(static_cast<std::size_t>(n), 0.0);
    if (with_wg) {
        for (Eigen::Index m = 0; m < n; ++m) {
            const auto& p = positions[static_cast<std::size_t>(m)];
            g1d[static_cast<std::size_t>(m)] = mode->gamma_1d_over_gamma0(p.x, p.y);
            cm.decay(m) = gamma0 * (1.0 + 6.0 * constants::pi * g1d[static_cast<std::size_t>(m)]);
        }
    }
    for (Eigen::Index m = 0; m < n; ++m) cm.Gamma(m, m) = cm.decay(m);

    const double rmin2 = opts.exclusion_radius * opts.exclusion_radius;
    for (Eigen::Index a = 0; a < n; ++a) {
        const Vec3& pa = positions[static_cast<std::size_t>(a)];
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Vec3& pb = positions[static_cast<std::size_t>(b)];
            const double r2 = (pa - pb).norm2();
            if (r2 <= rmin2 || r2 == 0.0) continue;
            complexd g = greens_free_space_xx(pa, pb, k);
            if (with_wg) {
                const double rate = std::sqrt(g1d[static_cast<std::size_t>(a)] *
                                              g1d[static_cast<std::size_t>(b)]);
                const double phase = mode->beta0() * std::abs(pa.z - pb.z);
                g += complexd(0.0, rate) * std::exp(complexd(0.0, phase));
            }
            const double j = -3.0 * constants::pi * gamma0 * g.real();
            const double gam = 6.0 * constants::pi * gamma0 * g.imag();
            cm.J(a, b) = cm.J(b, a) = j;
            cm.Gamma(a, b) = cm.Gamma(b, a) = gam;
        }
    }

    if (opts.check_psd && n > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cm.Gamma);
        const double floor = -1e-8 * gamma0;
        bool clip = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ev = es.eigenvalues()(i);
            if (ev < floor)
                throw std::runtime_error("coupling_matrices: dissipative matrix is not PSD");
            if (ev < 0.0) clip = true;
        }
        if (clip) {
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
            cm.Gamma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        }
    }
    return cm;
}

} // namespace slotsim
