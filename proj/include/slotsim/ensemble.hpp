#pragma once

// Monte-Carlo sampling of atomic positions/velocities and ballistic
// propagation with collision and respawn rules. Atom count is conserved:
// an atom leaving the probe volume is replaced by a fresh thermal atom
// entering through the crossed face, and an atom hitting the dielectric is
// reflected with its internal state reset (de-excited, coherence lost).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/params.hpp"
#include "slotsim/rng.hpp"

namespace slotsim {

struct EnsembleConfig {
    std::size_t n_atoms = 0;
    double density = 0.0;        // 1/m^3
    double temperature = 0.0;    // K
    double mass = constants::mass_rb85;
    std::uint64_t seed = 1;
    double dt = 0.0;             // s
    double t_total = 0.0;        // s
    double transient_discard = 0.0;  // fraction of initial steps excluded from averages

    double sigma_v() const {
        return temperature > 0.0 ? std::sqrt(constants::k_boltzmann * temperature / mass) : 0.0;
    }

    /// n_atoms = round(density * V_free).
    static std::size_t atoms_for_density(double density, const SimulationBox& box) {
        if (!(density > 0.0)) throw std::domain_error("density must be positive");
        return static_cast<std::size_t>(std::llround(density * box.free_volume()));
    }

    void validate() const {
        if (n_atoms == 0) throw std::domain_error("ensemble needs at least one atom");
        if (!(mass > 0.0)) throw std::domain_error("mass must be positive");
        if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
        if (!(t_total >= dt)) throw std::domain_error("t_total must be at least dt");
        if (!(temperature >= 0.0)) throw std::domain_error("temperature must be non-negative");
        if (transient_discard < 0.0 || transient_discard >= 1.0)
            throw std::domain_error("transient_discard must be in [0, 1)");
    }
};

namespace detail {

inline Vec3 sample_free_position(const SimulationBox& box, RngStream& rng) {
    const Aabb b = box.bounds();
    for (int attempt = 0; attempt < 64 * 1024; ++attempt) {
        Vec3 p{b.lo.x + rng.uniform() * (b.hi.x - b.lo.x),
               b.lo.y + rng.uniform() * (b.hi.y - b.lo.y),
               b.lo.z + rng.uniform() * (b.hi.z - b.lo.z)};
        if (!box.inside_dielectric(p)) return p;
    }
    throw std::runtime_error("sample_free_position: free volume too small to sample");
}

inline Vec3 sample_thermal_velocity(double sigma, RngStream& rng) {
    if (sigma == 0.0) return {};
    return {sigma * rng.gaussian(), sigma * rng.gaussian(), sigma * rng.gaussian()};
}

/// Earliest parameter t in (0, 1] at which p0 + t*d crosses into the slab-bounded box.
/// Returns entry time and entered-face axis, or t > 1 if no hit.
struct SegmentHit {
    double t = 2.0;
    int axis = -1;   // 0=x, 1=y, 2=z
    int side = 0;    // -1: lo face, +1: hi face
};

inline SegmentHit segment_enters_aabb(const Vec3& p0, const Vec3& d, const Aabb& box) {
    // slab method; the segment starts outside (or on the surface of) the box
    double t_enter = 0.0, t_exit = 1.0;
    int axis = -1, side = 0;
    const double p[3] = {p0.x, p0.y, p0.z};
    const double dd[3] = {d.x, d.y, d.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int i = 0; i < 3; ++i) {
        if (dd[i] == 0.0) {
            if (p[i] <= lo[i] || p[i] >= hi[i]) return {};
            continue;
        }
        double t0 = (lo[i] - p[i]) / dd[i];
        double t1 = (hi[i] - p[i]) / dd[i];
        int s = -1;
        if (t0 > t1) { std::swap(t0, t1); s = +1; }
        if (t0 > t_enter) { t_enter = t0; axis = i; side = s; }
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return {};
    }
    if (axis < 0) return {};  // started inside
    SegmentHit h;
    h.t = t_enter;
    h.axis = axis;
    h.side = side;
    return h;
}

/// Earliest t in (0, 1] at which the point leaves the box bounds.
inline SegmentHit segment_leaves_aabb(const Vec3& p0, const Vec3& d, const Aabb& box) {
    SegmentHit h;
    double t_exit = 2.0;
    const double p[3] = {p0.x, p0.y, p0.z};
    const double dd[3] = {d.x, d.y, d.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int i = 0; i < 3; ++i) {
        if (dd[i] == 0.0) continue;
        const double t = dd[i] > 0.0 ? (hi[i] - p[i]) / dd[i] : (lo[i] - p[i]) / dd[i];
        if (t >= 0.0 && t < t_exit) {
            t_exit = t;
            h.axis = i;
            h.side = dd[i] > 0.0 ? +1 : -1;
        }
    }
    h.t = t_exit;
    return h;
}

/// Fresh atom entering through a box face; normal velocity from the flux
/// distribution, tangential components thermal.
inline void respawn_on_face(AtomState& atom, const SimulationBox& box, int axis, int side,
                            double sigma, RngStream& rng) {
    const Aabb b = box.bounds();
    for (int attempt = 0; attempt < 64 * 1024; ++attempt) {
        Vec3 p{b.lo.x + rng.uniform() * (b.hi.x - b.lo.x),
               b.lo.y + rng.uniform() * (b.hi.y - b.lo.y),
               b.lo.z + rng.uniform() * (b.hi.z - b.lo.z)};
        double* pc = axis == 0 ? &p.x : (axis == 1 ? &p.y : &p.z);
        const double face = side > 0 ? (axis == 0 ? b.hi.x : axis == 1 ? b.hi.y : b.hi.z)
                                     : (axis == 0 ? b.lo.x : axis == 1 ? b.lo.y : b.lo.z);
        *pc = face;
        if (box.inside_dielectric(p)) continue;
        Vec3 v = sample_thermal_velocity(sigma, rng);
        double* vc = axis == 0 ? &v.x : (axis == 1 ? &v.y : &v.z);
        *vc = -static_cast<double>(side) * rng.flux_speed(sigma);
        atom.position = p;
        atom.velocity = v;
        atom.reset_to_ground();
        return;
    }
    throw std::runtime_error("respawn_on_face: could not place atom outside dielectric");
}

} // namespace detail

/// Initial ensemble: positions uniform over the free volume, Maxwell-Boltzmann
/// velocities, all atoms in the ground state.
inline std::vector<AtomState> sample_atoms(const EnsembleConfig& cfg, const SimulationBox& box,
                                           std::uint32_t trial) {
    cfg.validate();
    box.validate();
    const double sigma = cfg.sigma_v();
    std::vector<AtomState> atoms(cfg.n_atoms);
    for (std::size_t i = 0; i < cfg.n_atoms; ++i) {
        RngStream rng(cfg.seed, trial, static_cast<std::uint32_t>(i));
        atoms[i].position = detail::sample_free_position(box, rng);
        atoms[i].velocity = detail::sample_thermal_velocity(sigma, rng);
        atoms[i].reset_to_ground();
    }
    return atoms;
}

struct StepEvents {
    std::size_t box_exits = 0;
    std::size_t dielectric_hits = 0;
};

/// One ballistic step x <- x + v dt with the collision rules. rng_streams must
/// hold one stream per atom (the same streams used at sampling time).
inline StepEvents advance_positions(std::vector<AtomState>& atoms, const SimulationBox& box,
                                    double dt, std::vector<RngStream>& rng_streams,
                                    double sigma_v) {
    if (!(dt > 0.0)) throw std::domain_error("advance_positions: dt must be positive");
    StepEvents events;
    const Aabb bounds = box.bounds();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        AtomState& atom = atoms[i];
        RngStream& rng = rng_streams[i];
        Vec3 p0 = atom.position;
        Vec3 disp = atom.velocity * dt;
        bool settled = false;
        for (int bounce = 0; bounce < 4 && !settled; ++bounce) {
            const Vec3 p1 = p0 + disp;
            // earliest dielectric entry along the sub-path
            detail::SegmentHit diel_hit;
            for (const auto& d : box.dielectrics) {
                const auto h = detail::segment_enters_aabb(p0, disp, d);
                if (h.t < diel_hit.t) diel_hit = h;
            }
            const bool exits = !bounds.contains(p1);
            detail::SegmentHit exit_hit =
                exits ? detail::segment_leaves_aabb(p0, disp, bounds) : detail::SegmentHit{};

            if (diel_hit.t <= 1.0 && diel_hit.t < exit_hit.t) {
                // specular reflection off the dielectric face; state reset
                ++events.dielectric_hits;
                const Vec3 hit = p0 + disp * diel_hit.t;
                Vec3 rest = disp * (1.0 - diel_hit.t);
                if (diel_hit.axis == 0) { rest.x = -rest.x; atom.velocity.x = -atom.velocity.x; }
                if (diel_hit.axis == 1) { rest.y = -rest.y; atom.velocity.y = -atom.velocity.y; }
                if (diel_hit.axis == 2) { rest.z = -rest.z; atom.velocity.z = -atom.velocity.z; }
                atom.reset_to_ground();
                p0 = hit;
                disp = rest;
                continue;
            }
            if (exit_hit.t <= 1.0) {
                ++events.box_exits;
                detail::respawn_on_face(atom, box, exit_hit.axis, exit_hit.side, sigma_v, rng);
                settled = true;
                break;
            }
            atom.position = p1;
            settled = true;
        }
        if (!settled || !box.in_free_volume(atom.position)) {
            // multi-bounce corner case: replace with a fresh thermal atom
            atom.position = detail::sample_free_position(box, rng);
            atom.velocity = detail::sample_thermal_velocity(sigma_v, rng);
            atom.reset_to_ground();
            ++events.dielectric_hits;
        }
    }
    return events;
}

} // namespace slotsim
