#pragma once

// Mean-field Bloch-equation integrator with the collective effective Rabi
// frequency, and Monte-Carlo spectrum accumulation over detuning scans.
//
// Per atom m:
//   d<s_ge>/dt = -(i Delta_m + Gamma_m/2) <s_ge> - i Omega_eff^m <s_z>
//   d<s_ee>/dt = -2 Im(Omega_eff^m <s_ge>*) - Gamma_m <s_ee>
// with Delta_m = Delta0 + n_eff k v_z, Gamma_m = gamma0 PF(x_m, y_m) and
//   Omega_eff^m = Omega0(x_m,y_m) e^{i beta0 z_m}
//               + sum_{m' != m} (-J_mm' + i Gamma_mm'/2) <s_ge^{m'}>.
//
// The ensemble step is one fixed-step RK4 of the coupled system; the
// collective field is re-evaluated at every stage (freezing it across a step
// is unstable once |J| dt^(1/2) exceeds the pair damping).

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "slotsim/ensemble.hpp"
#include "slotsim/greens.hpp"
#include "slotsim/mode.hpp"
#include "slotsim/params.hpp"
#include "slotsim/spectrum.hpp"

namespace slotsim {

/// Collective drive of atom m: local waveguide drive plus the mean field of
/// all other atoms. Couplings must be current for the atoms' positions.
inline std::complex<double> effective_rabi(std::size_t m, std::span<const AtomState> atoms,
                                           const CouplingMatrices& couplings,
                                           const ModeProfile* mode, const LaserDrive& drive,
                                           double beta0) {
    const AtomState& a = atoms[m];
    const double amp =
        mode != nullptr ? mode->drive_amplitude_or_zero(a.position.x, a.position.y) : 1.0;
    const double phase = beta0 * a.position.z;
    std::complex<double> omega =
        drive.omega0_peak * amp * std::complex<double>(std::cos(phase), std::sin(phase));
    const Eigen::Index mi = static_cast<Eigen::Index>(m);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (j == m) continue;
        const Eigen::Index ji = static_cast<Eigen::Index>(j);
        const std::complex<double> coeff(-couplings.J(mi, ji), 0.5 * couplings.Gamma(mi, ji));
        omega += coeff * atoms[j].sigma_ge;
    }
    return omega;
}

/// One RK4 step of a single atom's Bloch equations with the effective Rabi
/// frequency held fixed across the step. Populations are clamped to [0, 1]
/// and the coherence to the physical ball afterwards.
inline AtomState bloch_step(const AtomState& state, std::complex<double> omega_eff,
                            double delta_total, double gamma_total, double dt) {
    if (!(dt * gamma_total < 0.1))
        throw std::runtime_error("bloch_step: dt * gamma_total >= 0.1, reduce the time step");

    struct Spin {
        std::complex<double> s;
        double e, g;
    };
    const auto rhs = [&](const Spin& y) {
        Spin d;
        const double sz = y.e - y.g;
        d.s = -(std::complex<double>(0.5 * gamma_total, delta_total)) * y.s -
              std::complex<double>(0.0, 1.0) * omega_eff * sz;
        const double pump = -2.0 * std::imag(omega_eff * std::conj(y.s));
        d.e = pump - gamma_total * y.e;
        d.g = -pump + gamma_total * y.e;
        return d;
    };

    Spin y{state.sigma_ge, state.sigma_ee, state.sigma_gg};
    const Spin k1 = rhs(y);
    const Spin y2{y.s + 0.5 * dt * k1.s, y.e + 0.5 * dt * k1.e, y.g + 0.5 * dt * k1.g};
    const Spin k2 = rhs(y2);
    const Spin y3{y.s + 0.5 * dt * k2.s, y.e + 0.5 * dt * k2.e, y.g + 0.5 * dt * k2.g};
    const Spin k3 = rhs(y3);
    const Spin y4{y.s + dt * k3.s, y.e + dt * k3.e, y.g + dt * k3.g};
    const Spin k4 = rhs(y4);

    AtomState out = state;
    out.sigma_ge = y.s + (dt / 6.0) * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    out.sigma_ee = y.e + (dt / 6.0) * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
    out.sigma_gg = y.g + (dt / 6.0) * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);

    out.sigma_ee = std::clamp(out.sigma_ee, 0.0, 1.0);
    out.sigma_gg = std::clamp(out.sigma_gg, 0.0, 1.0);
    const double ball = out.sigma_ee * out.sigma_gg;
    const double n2 = std::norm(out.sigma_ge);
    if (n2 > ball && n2 > 0.0) out.sigma_ge *= std::sqrt(std::max(ball, 0.0) / n2);
    return out;
}

// ---- ensemble integrator -------------------------------------------------------

namespace detail {

/// Precomputed per-step quantities for the coupled RK4 stage evaluations.
struct SpinWorkspace {
    std::vector<std::complex<double>> coupling;  // row-major (-J + i Gamma/2), zero diagonal
    std::vector<std::complex<double>> drive;     // Omega0(x,y) e^{i beta0 z}
    std::vector<double> delta;                   // Delta0 + Doppler
    std::vector<double> gamma;                   // gamma0 PF(x,y)

    std::vector<std::complex<double>> s0, s, ds, ks;
    std::vector<double> e0, e, de, ke;
    std::vector<double> g0, g, dg, kg;

    void resize(std::size_t n) {
        coupling.assign(n * n, {});
        drive.assign(n, {});
        delta.assign(n, 0.0);
        gamma.assign(n, 0.0);
        s0.assign(n, {}); s.assign(n, {}); ds.assign(n, {}); ks.assign(n, {});
        e0.assign(n, 0.0); e.assign(n, 0.0); de.assign(n, 0.0); ke.assign(n, 0.0);
        g0.assign(n, 0.0); g.assign(n, 0.0); dg.assign(n, 0.0); kg.assign(n, 0.0);
    }

    void load_couplings(const CouplingMatrices& cm) {
        const std::size_t n = gamma.size();
        for (std::size_t a = 0; a < n; ++a) {
            gamma[a] = cm.decay(static_cast<Eigen::Index>(a));
            for (std::size_t b = 0; b < n; ++b) {
                coupling[a * n + b] =
                    a == b ? std::complex<double>{}
                           : std::complex<double>(-cm.J(static_cast<Eigen::Index>(a),
                                                        static_cast<Eigen::Index>(b)),
                                                  0.5 * cm.Gamma(static_cast<Eigen::Index>(a),
                                                                 static_cast<Eigen::Index>(b)));
            }
        }
    }

    void load_drives(std::span<const AtomState> atoms, const ModeProfile* mode,
                     const LaserDrive& laser, double beta0, double doppler_factor) {
        const std::size_t n = atoms.size();
        for (std::size_t m = 0; m < n; ++m) {
            const auto& a = atoms[m];
            const double amp =
                mode != nullptr ? mode->drive_amplitude_or_zero(a.position.x, a.position.y) : 1.0;
            const double ph = beta0 * a.position.z;
            drive[m] = laser.omega0_peak * amp * std::complex<double>(std::cos(ph), std::sin(ph));
            delta[m] = laser.detuning + doppler_factor * a.velocity.z;
        }
    }

    void stage_rhs() {
        const std::size_t n = gamma.size();
        for (std::size_t m = 0; m < n; ++m) {
            std::complex<double> omega = drive[m];
            const std::complex<double>* row = coupling.data() + m * n;
            for (std::size_t j = 0; j < n; ++j) omega += row[j] * s[j];
            const double sz = e[m] - g[m];
            ds[m] = -(std::complex<double>(0.5 * gamma[m], delta[m])) * s[m] -
                    std::complex<double>(0.0, 1.0) * omega * sz;
            const double pump = -2.0 * std::imag(omega * std::conj(s[m]));
            de[m] = pump - gamma[m] * e[m];
            dg[m] = -pump + gamma[m] * e[m];
        }
    }

    /// Coupled RK4 step of all spins; positions/couplings fixed across the step.
    void step(std::vector<AtomState>& atoms, double dt) {
        const std::size_t n = atoms.size();
        for (std::size_t m = 0; m < n; ++m) {
            s0[m] = s[m] = atoms[m].sigma_ge;
            e0[m] = e[m] = atoms[m].sigma_ee;
            g0[m] = g[m] = atoms[m].sigma_gg;
        }
        stage_rhs();
        for (std::size_t m = 0; m < n; ++m) {
            ks[m] = ds[m]; ke[m] = de[m]; kg[m] = dg[m];
            s[m] = s0[m] + 0.5 * dt * ds[m];
            e[m] = e0[m] + 0.5 * dt * de[m];
            g[m] = g0[m] + 0.5 * dt * dg[m];
        }
        stage_rhs();
        for (std::size_t m = 0; m < n; ++m) {
            ks[m] += 2.0 * ds[m]; ke[m] += 2.0 * de[m]; kg[m] += 2.0 * dg[m];
            s[m] = s0[m] + 0.5 * dt * ds[m];
            e[m] = e0[m] + 0.5 * dt * de[m];
            g[m] = g0[m] + 0.5 * dt * dg[m];
        }
        stage_rhs();
        for (std::size_t m = 0; m < n; ++m) {
            ks[m] += 2.0 * ds[m]; ke[m] += 2.0 * de[m]; kg[m] += 2.0 * dg[m];
            s[m] = s0[m] + dt * ds[m];
            e[m] = e0[m] + dt * de[m];
            g[m] = g0[m] + dt * dg[m];
        }
        stage_rhs();
        for (std::size_t m = 0; m < n; ++m) {
            auto& atom = atoms[m];
            atom.sigma_ge = s0[m] + (dt / 6.0) * (ks[m] + ds[m]);
            atom.sigma_ee = std::clamp(e0[m] + (dt / 6.0) * (ke[m] + de[m]), 0.0, 1.0);
            atom.sigma_gg = std::clamp(g0[m] + (dt / 6.0) * (kg[m] + dg[m]), 0.0, 1.0);
            const double ball = atom.sigma_ee * atom.sigma_gg;
            const double norm2 = std::norm(atom.sigma_ge);
            if (norm2 > ball && norm2 > 0.0)
                atom.sigma_ge *= std::sqrt(std::max(ball, 0.0) / norm2);
        }
    }
};

} // namespace detail

/// Full scenario for one Monte-Carlo spectrum.
struct Scenario {
    PhysicalParams physics;
    SimulationBox box;
    std::shared_ptr<const ModeProfile> mode;  // null: uniform drive, vacuum couplings
    EnsembleConfig ensemble;
    LaserDrive drive;                         // detuning is set per grid point
    CouplingOptions coupling;
    bool dipole_dipole = true;                // false: no atom-atom exchange at all
    int refresh_stride = 1;                   // coupling refresh period in steps
    std::vector<Vec3> pinned_positions;       // optional fixed initial positions
    std::vector<double> detunings_gamma0;     // probe detuning grid (omega_L - omega_a)/gamma0
    int trials = 1;
    std::string config_hash;

    const ModeProfile* mode_ptr() const { return mode ? mode.get() : nullptr; }
};

namespace detail {

struct TrialOutcome {
    double mean_sigma_ee = 0.0;
    bool ok = false;
};

/// One Monte-Carlo trial at one detuning. Deterministic given (seed, trial).
inline TrialOutcome run_trial(const Scenario& sc, double probe_detuning_gamma0,
                              std::uint32_t trial) {
    const double gamma0 = sc.physics.gamma0;
    const double beta0 = sc.physics.beta0();
    const double k = sc.physics.k();

    std::vector<RngStream> streams;
    streams.reserve(sc.ensemble.n_atoms);
    for (std::size_t i = 0; i < sc.ensemble.n_atoms; ++i)
        streams.emplace_back(sc.ensemble.seed, trial, static_cast<std::uint32_t>(i));

    std::vector<AtomState> atoms(sc.ensemble.n_atoms);
    if (!sc.pinned_positions.empty()) {
        if (sc.pinned_positions.size() != sc.ensemble.n_atoms)
            throw std::invalid_argument("pinned position count != n_atoms");
        const double sigma = sc.ensemble.sigma_v();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            atoms[i].position = sc.pinned_positions[i];
            atoms[i].velocity = detail::sample_thermal_velocity(sigma, streams[i]);
            atoms[i].reset_to_ground();
        }
    } else {
        const double sigma = sc.ensemble.sigma_v();
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            atoms[i].position = detail::sample_free_position(sc.box, streams[i]);
            atoms[i].velocity = detail::sample_thermal_velocity(sigma, streams[i]);
            atoms[i].reset_to_ground();
        }
    }

    LaserDrive laser = sc.drive;
    laser.detuning = -probe_detuning_gamma0 * gamma0;  // Delta0 = omega_a - omega_L

    const long n_steps = std::lround(sc.ensemble.t_total / sc.ensemble.dt);
    const long discard = static_cast<long>(sc.ensemble.transient_discard * n_steps);
    const double dt = sc.ensemble.dt;
    const double doppler_factor = sc.physics.n_eff * k;
    const bool moving = sc.ensemble.sigma_v() > 0.0;

    SpinWorkspace ws;
    ws.resize(atoms.size());

    std::vector<Vec3> positions(atoms.size());
    auto refresh_couplings = [&](bool check_psd) {
        for (std::size_t i = 0; i < atoms.size(); ++i) positions[i] = atoms[i].position;
        CouplingOptions opts = sc.coupling;
        opts.check_psd = check_psd;
        CouplingMatrices cm = coupling_matrices(positions, k, sc.mode_ptr(), gamma0, opts);
        if (!sc.dipole_dipole) {
            cm.J.setZero();
            Eigen::VectorXd d = cm.Gamma.diagonal();
            cm.Gamma.setZero();
            cm.Gamma.diagonal() = d;
        }
        ws.load_couplings(cm);
    };

    refresh_couplings(sc.coupling.check_psd);
    ws.load_drives(atoms, sc.mode_ptr(), laser, beta0, doppler_factor);

    double acc = 0.0;
    long n_acc = 0;
    const double inv_n = 1.0 / static_cast<double>(atoms.size());
    for (long step = 0; step < n_steps; ++step) {
        if (moving) {
            advance_positions(atoms, sc.box, dt, streams, sc.ensemble.sigma_v());
            if (sc.refresh_stride <= 1 || step % sc.refresh_stride == 0)
                refresh_couplings(false);
            ws.load_drives(atoms, sc.mode_ptr(), laser, beta0, doppler_factor);
        }
        ws.step(atoms, dt);
        if (step >= discard) {
            double pop = 0.0;
            for (const auto& a : atoms) pop += a.sigma_ee;
            acc += pop * inv_n;
            ++n_acc;
        }
    }

    TrialOutcome out;
    out.mean_sigma_ee = n_acc > 0 ? acc / static_cast<double>(n_acc) : 0.0;
    out.ok = std::isfinite(out.mean_sigma_ee);
    return out;
}

} // namespace detail

/// Monte-Carlo spectrum: `trials` independent trials per detuning, reduced in
/// fixed order. Identical (seed, scenario) gives bit-identical results for any
/// worker count; trial t sees the same trajectories at every detuning.
inline Spectrum simulate_spectrum(const Scenario& sc, int workers = 1) {
    if (sc.detunings_gamma0.empty())
        throw std::invalid_argument("simulate_spectrum: empty detuning grid");
    if (sc.trials < 1) throw std::invalid_argument("simulate_spectrum: trials must be >= 1");
    sc.ensemble.validate();

    const std::size_t nd = sc.detunings_gamma0.size();
    const std::size_t nt = static_cast<std::size_t>(sc.trials);
    std::vector<detail::TrialOutcome> slots(nd * nt);

    const std::size_t n_tasks = nd * nt;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const std::size_t d = task / nt;
            const std::size_t t = task % nt;
            slots[task] = detail::run_trial(sc, sc.detunings_gamma0[d],
                                            static_cast<std::uint32_t>(t));
            (void)d;
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    Spectrum spec;
    spec.detunings = sc.detunings_gamma0;
    spec.absorption.resize(nd);
    spec.std_err.resize(nd);
    spec.config_hash = sc.config_hash;
    spec.seed = sc.ensemble.seed;
    spec.trials = sc.trials;
    for (std::size_t d = 0; d < nd; ++d) {
        double sum = 0.0;
        int good = 0;
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& o = slots[d * nt + t];
            if (!o.ok) continue;
            sum += o.mean_sigma_ee;
            ++good;
        }
        spec.failed_trials += static_cast<int>(nt) - good;
        if (good == 0) throw std::runtime_error("simulate_spectrum: all trials failed");
        const double mean = sum / good;
        double var = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& o = slots[d * nt + t];
            if (!o.ok) continue;
            var += (o.mean_sigma_ee - mean) * (o.mean_sigma_ee - mean);
        }
        spec.absorption[d] = mean;
        spec.std_err[d] = good > 1 ? std::sqrt(var / (good - 1.0) / good) : 0.0;
    }
    return spec;
}

/// Stability-aware default time step: resolves the fastest decay, the mode
/// gradient along a thermal trajectory, and keeps the strongest admitted pair
/// exchange inside the RK4 stability region.
inline double default_time_step(const PhysicalParams& physics, const SimulationBox& box,
                                double pf_max, double sigma_v, double exclusion_radius) {
    double dt = 1.0 / (200.0 * physics.gamma0 * std::max(1.0, pf_max));
    if (sigma_v > 0.0) {
        const double ext = std::min({box.extents.x, box.extents.y, box.extents.z});
        dt = std::min(dt, ext / (50.0 * sigma_v));
    }
    if (exclusion_radius > 0.0) {
        const double u = physics.k() * exclusion_radius;
        const double j_cap = 1.5 * physics.gamma0 / (u * u * u);  // head-to-tail near field
        dt = std::min(dt, 1.0 / j_cap);
    }
    return dt;
}

} // namespace slotsim
