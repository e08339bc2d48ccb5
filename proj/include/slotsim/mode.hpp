#pragma once

// Spatial model of the slot-waveguide guided mode: the coupling-rate map
// Gamma_WG(x,y)/gamma0, the normalized drive amplitude |E|(x,y), effective
// index and mode area. Profiles are immutable after construction; values are
// bilinearly interpolated on a rectilinear (x, y) grid.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/geometry.hpp"
#include "slotsim/params.hpp"

namespace slotsim {

class ModeProfile {
  public:
    /// amp is row-major [iy * nx + ix], normalized so max = 1 (or all zero).
    ModeProfile(std::vector<double> xs, std::vector<double> ys, std::vector<double> amp,
                double pf_max, double n_eff, double k)
        : xs_(std::move(xs)), ys_(std::move(ys)), amp_(std::move(amp)),
          pf_max_(pf_max), n_eff_(n_eff), beta0_(n_eff * k) {
        validate();
        a_eff_ = all_zero() ? 0.0 : compute_effective_area();
    }

    std::size_t nx() const { return xs_.size(); }
    std::size_t ny() const { return ys_.size(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }
    const std::vector<double>& amplitudes() const { return amp_; }
    double pf_max() const { return pf_max_; }
    double n_eff() const { return n_eff_; }
    double beta0() const { return beta0_; }
    double effective_area() const { return a_eff_; }

    bool contains(double x, double y) const {
        return x >= xs_.front() && x <= xs_.back() && y >= ys_.front() && y <= ys_.back();
    }

    /// Normalized |E| at (x, y); domain error outside the grid.
    double drive_amplitude(double x, double y) const {
        if (!contains(x, y)) throw std::domain_error("position outside mode-profile domain");
        return interpolate(x, y);
    }

    /// Gamma_WG(x,y)/gamma0 = (pf_max - 1) |E|^2.
    double gamma_wg_over_gamma0(double x, double y) const {
        const double a = drive_amplitude(x, y);
        return (pf_max_ - 1.0) * a * a;
    }

    /// As above, but 0 outside the profile domain (mode vanished).
    double gamma_wg_over_gamma0_or_zero(double x, double y) const {
        if (!contains(x, y)) return 0.0;
        const double a = interpolate(x, y);
        return (pf_max_ - 1.0) * a * a;
    }

    double drive_amplitude_or_zero(double x, double y) const {
        if (!contains(x, y)) return 0.0;
        return interpolate(x, y);
    }

    /// PF(x,y) = 1 + Gamma_WG/gamma0 = 1 + 6 pi Gamma_1D/gamma0.
    double purcell(double x, double y) const { return 1.0 + gamma_wg_over_gamma0_or_zero(x, y); }

    /// Gamma_1D(x,y)/gamma0 entering the waveguide Green's function.
    double gamma_1d_over_gamma0(double x, double y) const {
        return gamma_wg_over_gamma0_or_zero(x, y) / (6.0 * constants::pi);
    }

  private:
    bool all_zero() const {
        return std::all_of(amp_.begin(), amp_.end(), [](double v) { return v == 0.0; });
    }

    double interpolate(double x, double y) const {
        const std::size_t ix = cell_index(xs_, x);
        const std::size_t iy = cell_index(ys_, y);
        const double tx = (x - xs_[ix]) / (xs_[ix + 1] - xs_[ix]);
        const double ty = (y - ys_[iy]) / (ys_[iy + 1] - ys_[iy]);
        const double v00 = amp_[iy * nx() + ix];
        const double v10 = amp_[iy * nx() + ix + 1];
        const double v01 = amp_[(iy + 1) * nx() + ix];
        const double v11 = amp_[(iy + 1) * nx() + ix + 1];
        return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
               (1 - tx) * ty * v01 + tx * ty * v11;
    }

    static std::size_t cell_index(const std::vector<double>& axis, double v) {
        auto it = std::upper_bound(axis.begin(), axis.end(), v);
        std::size_t i = static_cast<std::size_t>(it - axis.begin());
        if (i == 0) return 0;
        if (i >= axis.size()) return axis.size() - 2;
        return i - 1;
    }

    /// A_eff = (1/max S) Int S dA with S ~ |E|^2, trapezoidal quadrature.
    double compute_effective_area() const {
        double smax = 0.0;
        for (double a : amp_) smax = std::max(smax, a * a);
        double integral = 0.0;
        for (std::size_t iy = 0; iy + 1 < ny(); ++iy) {
            const double dy = ys_[iy + 1] - ys_[iy];
            for (std::size_t ix = 0; ix + 1 < nx(); ++ix) {
                const double dx = xs_[ix + 1] - xs_[ix];
                const double s00 = amp_[iy * nx() + ix] * amp_[iy * nx() + ix];
                const double s10 = amp_[iy * nx() + ix + 1] * amp_[iy * nx() + ix + 1];
                const double s01 = amp_[(iy + 1) * nx() + ix] * amp_[(iy + 1) * nx() + ix];
                const double s11 = amp_[(iy + 1) * nx() + ix + 1] * amp_[(iy + 1) * nx() + ix + 1];
                integral += 0.25 * (s00 + s10 + s01 + s11) * dx * dy;
            }
        }
        return integral / smax;
    }

    void validate() const {
        if (xs_.size() < 2 || ys_.size() < 2)
            throw std::invalid_argument("mode profile grid needs at least 2x2 nodes");
        if (amp_.size() != xs_.size() * ys_.size())
            throw std::invalid_argument("mode profile value count does not match grid");
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
            if (!(xs_[i] < xs_[i + 1])) throw std::invalid_argument("x axis not strictly increasing");
        for (std::size_t i = 0; i + 1 < ys_.size(); ++i)
            if (!(ys_[i] < ys_[i + 1])) throw std::invalid_argument("y axis not strictly increasing");
        double amax = 0.0;
        for (double v : amp_) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite mode amplitude");
            if (v < 0.0) throw std::invalid_argument("negative mode amplitude");
            amax = std::max(amax, v);
        }
        if (amax > 1.0 + 1e-9) throw std::invalid_argument("mode amplitude exceeds 1");
        if (!(pf_max_ >= 1.0)) throw std::domain_error("pf_max must be >= 1");
        if (!(n_eff_ > 0.0)) throw std::domain_error("n_eff must be positive");
    }

    std::vector<double> xs_, ys_, amp_;
    double pf_max_, n_eff_, beta0_, a_eff_ = 0.0;
};

/// A_eff = (1/max S) Int S dA; domain error if the profile is identically zero.
inline double effective_mode_area(const ModeProfile& profile) {
    const auto& amp = profile.amplitudes();
    if (std::all_of(amp.begin(), amp.end(), [](double v) { return v == 0.0; }))
        throw std::domain_error("effective_mode_area: profile is identically zero");
    return profile.effective_area();
}

/// Local drive Omega0(x, y) = omega0_peak * |E|(x, y). The propagation phase
/// e^{i beta0 z} is applied by the dynamics, not here.
inline double local_drive(const ModeProfile& profile, const Vec3& position, double omega0_peak) {
    return omega0_peak * profile.drive_amplitude(position.x, position.y);
}

// ---- analytic fallback -------------------------------------------------------

/// Exponential-decay stand-in for a solver-computed mode map: Gamma_WG/gamma0
/// is uniform (= pf_max - 1) across the gap interior and decays as
/// exp(-d / decay_length) with d the distance to the gap rectangle.
inline ModeProfile analytic_fallback_profile(const PhysicalParams& params,
                                             const SlotGeometry& slot, double pf_max,
                                             double decay_length = 50e-9,
                                             double half_extent_x = 0.0,
                                             double half_extent_y = 0.0,
                                             double resolution = 2e-9) {
    if (!(pf_max >= 1.0)) throw std::domain_error("pf_max must be >= 1");
    slot.validate();
    if (!(decay_length > 0.0)) throw std::domain_error("decay_length must be positive");

    const double gx = slot.gap / 2.0;
    const double gy = slot.ridge_height / 2.0;
    if (half_extent_x <= 0.0) half_extent_x = gx + slot.ridge_width + 8.0 * decay_length;
    if (half_extent_y <= 0.0) half_extent_y = gy + 8.0 * decay_length;

    auto make_axis = [&](double half) {
        const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * half / resolution)) + 1;
        std::vector<double> axis(n);
        for (std::size_t i = 0; i < n; ++i)
            axis[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
        return axis;
    };
    std::vector<double> xs = make_axis(half_extent_x);
    std::vector<double> ys = make_axis(half_extent_y);

    std::vector<double> amp(xs.size() * ys.size());
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < xs.size(); ++ix) {
            const double dx = std::max(0.0, std::abs(xs[ix]) - gx);
            const double dy = std::max(0.0, std::abs(ys[iy]) - gy);
            const double d = std::sqrt(dx * dx + dy * dy);
            // Gamma_WG ~ |E|^2 decays with decay_length, so |E| with twice that.
            amp[iy * xs.size() + ix] = std::exp(-0.5 * d / decay_length);
        }
    }
    if (pf_max == 1.0) std::fill(amp.begin(), amp.end(), 0.0);
    return ModeProfile(std::move(xs), std::move(ys), std::move(amp), pf_max,
                       params.n_eff, params.k());
}

// ---- file format ---------------------------------------------------------------
//
// Plain-text rectilinear grid, versioned header:
//   # slotsim-mode-profile v1
//   # pf_max <value>
//   # n_eff <value>
//   # nx <count>
//   # ny <count>
//   then nx*ny rows "x y amplitude" in row-major order (y outer, x inner).

inline void write_mode_profile(std::ostream& os, const ModeProfile& p) {
    os.precision(17);
    os << "# slotsim-mode-profile v1\n";
    os << "# pf_max " << p.pf_max() << "\n";
    os << "# n_eff " << p.n_eff() << "\n";
    os << "# nx " << p.nx() << "\n";
    os << "# ny " << p.ny() << "\n";
    for (std::size_t iy = 0; iy < p.ny(); ++iy)
        for (std::size_t ix = 0; ix < p.nx(); ++ix)
            os << p.xs()[ix] << " " << p.ys()[iy] << " " << p.amplitudes()[iy * p.nx() + ix]
               << "\n";
}

inline void write_mode_profile(const std::string& path, const ModeProfile& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open mode-profile file for writing: " + path);
    write_mode_profile(os, p);
}

inline ModeProfile load_mode_profile(std::istream& is, double k) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error("mode-profile parse error at line " + std::to_string(line_no) +
                                  ": " + msg);
    };

    if (!std::getline(is, line)) throw fail("empty file");
    ++line_no;
    if (line.find("slotsim-mode-profile v1") == std::string::npos)
        throw fail("missing or unsupported version header");

    double pf_max = -1.0, n_eff = -1.0;
    std::size_t nx = 0, ny = 0;
    for (int i = 0; i < 4; ++i) {
        if (!std::getline(is, line)) throw fail("truncated header");
        ++line_no;
        std::istringstream ss(line);
        std::string hash, name;
        ss >> hash >> name;
        if (hash != "#") throw fail("expected '# name value' header line");
        if (name == "pf_max") ss >> pf_max;
        else if (name == "n_eff") ss >> n_eff;
        else if (name == "nx") ss >> nx;
        else if (name == "ny") ss >> ny;
        else throw fail("unknown header field '" + name + "'");
        if (ss.fail()) throw fail("malformed header value");
    }
    if (!(pf_max >= 1.0)) throw fail("pf_max must be >= 1");
    if (!(n_eff > 0.0)) throw fail("n_eff must be positive");
    if (nx < 2 || ny < 2) throw fail("grid must be at least 2x2");

    std::vector<double> xs(nx), ys(ny), amp(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            if (!std::getline(is, line)) throw fail("truncated grid data");
            ++line_no;
            std::istringstream ss(line);
            double x, y, a;
            ss >> x >> y >> a;
            if (ss.fail()) throw fail("malformed grid row");
            if (!std::isfinite(a)) throw fail("non-finite amplitude");
            if (a < 0.0) throw fail("negative amplitude");
            if (iy == 0) xs[ix] = x;
            else if (xs[ix] != x) throw fail("x coordinate inconsistent with first row");
            if (ix == 0) ys[iy] = y;
            else if (ys[iy] != y) throw fail("y coordinate inconsistent within row");
            amp[iy * nx + ix] = a;
        }
    }
    return ModeProfile(std::move(xs), std::move(ys), std::move(amp), pf_max, n_eff, k);
}

inline ModeProfile load_mode_profile(const std::string& path, double k) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open mode-profile file: " + path);
    return load_mode_profile(is, k);
}

} // namespace slotsim
