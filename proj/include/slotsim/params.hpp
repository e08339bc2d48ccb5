#pragma once

// Domain types and unit conventions shared by all modules.
//
// Units are SI throughout; rates and detunings are angular (rad/s).
// User-facing reports express detunings and shifts in units of gamma0.

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/geometry.hpp"

namespace slotsim {

/// Probe-transition and waveguide parameters.
struct PhysicalParams {
    double lambda_probe = 1529e-9;                    // m
    double n_eff        = 2.53;                       // effective mode index
    double gamma0       = 2.0 * constants::pi * 1.89e6; // rad/s, natural decay rate
    double i_sat        = 1.4;                        // W/m^2 saturation intensity
    double temperature  = 300.0;                      // K
    double l_interaction = 200e-6;                    // m

    double k() const { return 2.0 * constants::pi / lambda_probe; }
    double beta0() const { return n_eff * k(); }
    double phase_velocity() const { return constants::c_light / n_eff; }

    void validate() const {
        if (!(lambda_probe > 0.0)) throw std::domain_error("lambda_probe must be positive");
        if (!(n_eff > 0.0)) throw std::domain_error("n_eff must be positive");
        if (!(gamma0 > 0.0)) throw std::domain_error("gamma0 must be positive");
        if (!(i_sat > 0.0)) throw std::domain_error("i_sat must be positive");
        if (!(temperature >= 0.0)) throw std::domain_error("temperature must be non-negative");
        if (!(l_interaction > 0.0)) throw std::domain_error("l_interaction must be positive");
    }
};

/// Slot-waveguide cross-section: two ridges of width w and height h
/// separated by a gap g. The gap is along x (the polarization axis),
/// the ridge height along y, propagation along z.
struct SlotGeometry {
    double ridge_width  = 300e-9;
    double ridge_height = 250e-9;
    double gap          = 50e-9;

    void validate() const {
        if (!(ridge_width > 0.0 && ridge_height > 0.0 && gap > 0.0))
            throw std::domain_error("slot geometry lengths must be positive");
    }
};

/// Probe volume centered at the origin with dielectric exclusions.
struct SimulationBox {
    Vec3 extents;                   // full box edge lengths
    std::vector<Aabb> dielectrics;  // excluded volumes, inside the box

    static SimulationBox vacuum(const Vec3& extents) {
        SimulationBox box;
        box.extents = extents;
        box.validate();
        return box;
    }

    /// Box containing the two slot ridges (full z extent). Ridges reaching
    /// past the probe volume are clipped to it.
    static SimulationBox with_slot(const Vec3& extents, const SlotGeometry& slot) {
        slot.validate();
        SimulationBox box;
        box.extents = extents;
        const double hz = extents.z / 2.0;
        const double g2 = slot.gap / 2.0;
        const double h2 = slot.ridge_height / 2.0;
        const Aabb bounds{{-extents.x / 2.0, -extents.y / 2.0, -hz},
                          {extents.x / 2.0, extents.y / 2.0, hz}};
        auto clip = [&](Aabb d) -> std::optional<Aabb> {
            d.lo = {std::max(d.lo.x, bounds.lo.x), std::max(d.lo.y, bounds.lo.y),
                    std::max(d.lo.z, bounds.lo.z)};
            d.hi = {std::min(d.hi.x, bounds.hi.x), std::min(d.hi.y, bounds.hi.y),
                    std::min(d.hi.z, bounds.hi.z)};
            if (d.lo.x >= d.hi.x || d.lo.y >= d.hi.y || d.lo.z >= d.hi.z) return std::nullopt;
            return d;
        };
        if (auto d = clip({{g2, -h2, -hz}, {g2 + slot.ridge_width, h2, hz}}))
            box.dielectrics.push_back(*d);
        if (auto d = clip({{-g2 - slot.ridge_width, -h2, -hz}, {-g2, h2, hz}}))
            box.dielectrics.push_back(*d);
        box.validate();
        return box;
    }

    Aabb bounds() const {
        return {{-extents.x / 2.0, -extents.y / 2.0, -extents.z / 2.0},
                {extents.x / 2.0, extents.y / 2.0, extents.z / 2.0}};
    }

    bool inside_dielectric(const Vec3& p) const {
        for (const auto& d : dielectrics)
            if (d.contains_open(p)) return true;
        return false;
    }

    bool in_free_volume(const Vec3& p) const {
        return bounds().contains(p) && !inside_dielectric(p);
    }

    double volume() const { return extents.x * extents.y * extents.z; }

    double free_volume() const {
        double v = volume();
        for (const auto& d : dielectrics) v -= d.volume();
        return v;
    }

    void validate() const {
        if (!(extents.x > 0.0 && extents.y > 0.0 && extents.z > 0.0))
            throw std::domain_error("box extents must be positive");
        const Aabb b = bounds();
        for (const auto& d : dielectrics) {
            if (!(b.contains(d.lo) && b.contains(d.hi)))
                throw std::domain_error("dielectric volume extends outside the box");
            if (!(d.lo.x <= d.hi.x && d.lo.y <= d.hi.y && d.lo.z <= d.hi.z))
                throw std::domain_error("dielectric volume has inverted corners");
        }
        if (!(free_volume() > 0.0))
            throw std::domain_error("free (vapor-accessible) volume must be positive");
    }
};

/// Position, velocity and mean-field spin variables of one atom.
struct AtomState {
    Vec3 position;
    Vec3 velocity;
    std::complex<double> sigma_ge{0.0, 0.0};
    double sigma_ee = 0.0;
    double sigma_gg = 1.0;

    void reset_to_ground() {
        sigma_ge = {0.0, 0.0};
        sigma_ee = 0.0;
        sigma_gg = 1.0;
    }

    double inversion() const { return sigma_ee - sigma_gg; }

    bool physical(double tol = 1e-9) const {
        if (!(sigma_ee >= -tol && sigma_ee <= 1.0 + tol)) return false;
        if (std::abs(sigma_ee + sigma_gg - 1.0) > tol) return false;
        return std::norm(sigma_ge) <= sigma_ee * sigma_gg + tol;
    }
};

/// Classical probe drive. detuning is Delta0 = omega_atom - omega_laser.
struct LaserDrive {
    double detuning = 0.0;      // rad/s
    double intensity = 0.0;     // W/m^2
    double omega0_peak = 0.0;   // rad/s, peak Rabi frequency at the mode maximum

    static LaserDrive from_intensity(double intensity, const PhysicalParams& p);
    static LaserDrive from_rabi(double omega0_peak, const PhysicalParams& p) {
        LaserDrive d;
        d.omega0_peak = omega0_peak;
        d.intensity = 2.0 * p.i_sat * (omega0_peak / p.gamma0) * (omega0_peak / p.gamma0);
        return d;
    }
};

// ---- elementary conversions ------------------------------------------------

/// Wigner-Seitz mean inter-atomic distance r = (4 pi n / 3)^(-1/3).
inline double mean_distance(double density) {
    if (!(density > 0.0)) throw std::domain_error("density must be positive");
    return std::cbrt(3.0 / (4.0 * constants::pi * density));
}

/// Normalized density (k r)^-3 with r the mean inter-atomic distance.
inline double normalized_density(double density, double k) {
    if (!(k > 0.0)) throw std::domain_error("wavenumber must be positive");
    const double kr = k * mean_distance(density);
    return 1.0 / (kr * kr * kr);
}

/// Inverse of normalized_density: the density giving (k r)^-3 = nu.
inline double density_from_normalized(double nu, double k) {
    if (!(nu > 0.0)) throw std::domain_error("normalized density must be positive");
    if (!(k > 0.0)) throw std::domain_error("wavenumber must be positive");
    const double k3 = k * k * k;
    return 3.0 / (4.0 * constants::pi) * k3 * nu;
}

/// Peak Rabi frequency from intensity: Omega0 = gamma0 sqrt(I / (2 I_sat)),
/// so I = 2 I_sat corresponds to Omega0 = gamma0.
inline double rabi_from_intensity(double intensity, double i_sat, double gamma0) {
    if (intensity < 0.0) throw std::domain_error("intensity must be non-negative");
    if (!(i_sat > 0.0)) throw std::domain_error("i_sat must be positive");
    return gamma0 * std::sqrt(intensity / (2.0 * i_sat));
}

/// Doppler shift of an atom moving along the propagation axis.
inline double doppler_shift(double v_z, double n_eff, double k) {
    return n_eff * k * v_z;
}

inline LaserDrive LaserDrive::from_intensity(double intensity, const PhysicalParams& p) {
    LaserDrive d;
    d.intensity = intensity;
    d.omega0_peak = rabi_from_intensity(intensity, p.i_sat, p.gamma0);
    return d;
}

} // namespace slotsim
