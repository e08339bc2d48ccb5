#pragma once

// Exact small-N Lindblad master-equation solver and closed-form single-atom
// scattering, used as independent verification oracles for the mean-field
// dynamics. The solver shares the CouplingMatrices convention of the main
// path so a comparison isolates the factorization error only.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/greens.hpp"

namespace slotsim {

/// 2^N-dimensional density matrix with physicality checks.
struct DensityMatrix {
    Eigen::MatrixXcd rho;

    void validate(double tol_herm = 1e-12, double tol_trace = 1e-12,
                  double tol_psd = -1e-10) const {
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol_herm)
            throw std::runtime_error("density matrix not Hermitian");
        if (std::abs(rho.trace().real() - 1.0) > tol_trace || std::abs(rho.trace().imag()) > tol_trace)
            throw std::runtime_error("density matrix trace != 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        if (es.eigenvalues().minCoeff() < tol_psd)
            throw std::runtime_error("density matrix not positive semidefinite");
    }
};

namespace detail {

/// sigma_ge acting on atom m of N (basis: |g> = 0, |e> = 1, atom 0 outermost).
inline Eigen::MatrixXcd embed_qubit_op(const Eigen::Matrix2cd& op, int m, int n_atoms) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (int j = 0; j < n_atoms; ++j) {
        const Eigen::MatrixXcd& factor =
            (j == m) ? static_cast<const Eigen::MatrixXcd&>(op.cast<std::complex<double>>())
                     : Eigen::MatrixXcd::Identity(2, 2);
        Eigen::MatrixXcd next(out.rows() * factor.rows(), out.cols() * factor.cols());
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c)
                next.block(r * factor.rows(), c * factor.cols(), factor.rows(), factor.cols()) =
                    out(r, c) * factor;
        out = std::move(next);
    }
    return out;
}

} // namespace detail

struct LindbladOptions {
    double dt = 0.0;        // 0: derived from the fastest rate
    double t_max = 0.0;     // 0: 50 / gamma0
    double tol = 1e-10;     // steady when ||drho/dt|| < tol * gamma0
};

struct LindbladResult {
    DensityMatrix state;
    Eigen::VectorXd sigma_ee;   // per-atom excited population
    double residual = 0.0;      // ||drho/dt|| at exit, in gamma0 units
    bool converged = false;
};

/// Steady state of N fixed atoms under drive Omega_m at detuning Delta0,
/// obtained by integrating d rho/dt = -i[H, rho] + D(rho) from the ground
/// state. H and D use the same J/Gamma matrices as the mean-field path.
inline LindbladResult lindblad_steady_state(const CouplingMatrices& cm,
                                            const std::vector<std::complex<double>>& drives,
                                            double detuning, double gamma0,
                                            const LindbladOptions& opts = {}) {
    const int n = static_cast<int>(drives.size());
    if (n < 1 || n > 6) throw std::invalid_argument("lindblad_steady_state: need 1..6 atoms");
    if (cm.J.rows() != n || cm.Gamma.rows() != n)
        throw std::invalid_argument("lindblad_steady_state: matrix size mismatch");

    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::Matrix2cd sge2;
    sge2 << 0, 1, 0, 0;   // |g><e|
    Eigen::Matrix2cd see2;
    see2 << 0, 0, 0, 1;   // |e><e|

    std::vector<Eigen::MatrixXcd> sge(n), seg(n), see(n);
    for (int m = 0; m < n; ++m) {
        sge[m] = detail::embed_qubit_op(sge2, m, n);
        seg[m] = sge[m].adjoint();
        see[m] = detail::embed_qubit_op(see2, m, n);
    }

    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m < n; ++m)
        H += detuning * see[m] - (drives[m] * seg[m] + std::conj(drives[m]) * sge[m]);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            if (j != m) H += cm.J(m, j) * seg[m] * sge[j];

    // diagonalize Gamma into independent jump channels
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cm.Gamma);
    std::vector<Eigen::MatrixXcd> jumps;
    double rate_scale = gamma0;
    for (int k = 0; k < n; ++k) {
        double lam = es.eigenvalues()(k);
        if (lam < -1e-8 * gamma0)
            throw std::runtime_error("lindblad_steady_state: Gamma matrix not PSD");
        if (lam <= 0.0) continue;
        rate_scale = std::max(rate_scale, lam);
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
        for (int m = 0; m < n; ++m) a += es.eigenvectors()(m, k) * sge[m];
        jumps.push_back(std::sqrt(lam) * a);
    }

    double scale = rate_scale + std::abs(detuning);
    for (const auto& d : drives) scale += std::abs(d);
    scale += cm.J.cwiseAbs().maxCoeff() * n;

    Eigen::MatrixXcd h_nh = H;  // H - (i/2) sum L^dag L
    for (const auto& L : jumps) h_nh -= std::complex<double>(0.0, 0.5) * (L.adjoint() * L);

    auto liouvillian = [&](const Eigen::MatrixXcd& rho) {
        Eigen::MatrixXcd out = std::complex<double>(0.0, -1.0) * (h_nh * rho - rho * h_nh.adjoint());
        for (const auto& L : jumps) out += L * rho * L.adjoint();
        return out;
    };

    const double dt = opts.dt > 0.0 ? opts.dt : 0.5 / scale;
    const double t_max = opts.t_max > 0.0 ? opts.t_max : 50.0 / gamma0;

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;  // all atoms in the ground state

    LindbladResult result;
    const long max_steps = static_cast<long>(t_max / dt) + 1;
    for (long step = 0; step < max_steps; ++step) {
        const Eigen::MatrixXcd k1 = liouvillian(rho);
        if (step % 20 == 0) {
            result.residual = k1.norm() / gamma0;
            if (result.residual < opts.tol) {
                result.converged = true;
                break;
            }
        }
        const Eigen::MatrixXcd k2 = liouvillian(rho + 0.5 * dt * k1);
        const Eigen::MatrixXcd k3 = liouvillian(rho + 0.5 * dt * k2);
        const Eigen::MatrixXcd k4 = liouvillian(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!result.converged) {
        result.residual = liouvillian(rho).norm() / gamma0;
        result.converged = result.residual < opts.tol;
    }

    result.state.rho = rho;
    result.sigma_ee.resize(n);
    for (int m = 0; m < n; ++m) result.sigma_ee(m) = (rho * see[m]).trace().real();
    return result;
}

// ---- single atom coupled to the waveguide, weak-probe closed forms -----------

struct ScatteringResult {
    std::complex<double> sigma_ge;     // steady-state coherence (E0 = 1)
    std::complex<double> reflection;   // r(delta)
    std::complex<double> transmission; // t(delta) = 1 + r(delta)
};

/// Weak-probe steady state of one atom at coupling g0 in a waveguide with
/// phase velocity v_p: Gamma_WG = 4 pi g0^2 / v_p, total decay gamma1 + Gamma_WG.
inline ScatteringResult single_atom_scattering(double delta, double g0, double v_p,
                                               double gamma0, double gamma1) {
    if (!(v_p > 0.0)) throw std::domain_error("phase velocity must be positive");
    if (g0 < 0.0) throw std::domain_error("coupling rate must be non-negative");
    const double gamma_wg = 4.0 * constants::pi * g0 * g0 / v_p;
    const double gamma_total = gamma1 + gamma_wg;  // PF * gamma0 when gamma1 = gamma0
    if (!(gamma_total > 0.0)) throw std::domain_error("total decay must be positive");
    (void)gamma0;
    ScatteringResult out;
    const std::complex<double> denom(gamma_total, 2.0 * delta);  // i*2delta + PF*Gamma0
    out.sigma_ge = std::complex<double>(0.0, 1.0) * g0 * std::sqrt(2.0 * constants::pi) /
                   (std::complex<double>(0.5 * gamma_total, delta));
    out.reflection = -gamma_wg / denom;
    out.transmission = 1.0 + out.reflection;
    return out;
}

/// Coupling g0 reproducing a given waveguide decay rate: g0 = sqrt(Gamma_WG v_p / 4 pi).
inline double coupling_from_gamma_wg(double gamma_wg, double v_p) {
    if (gamma_wg < 0.0) throw std::domain_error("gamma_wg must be non-negative");
    return std::sqrt(gamma_wg * v_p / (4.0 * constants::pi));
}

} // namespace slotsim
