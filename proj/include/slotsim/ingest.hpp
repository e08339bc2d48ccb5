#pragma once

// Readers/writers for external data: measured-spectrum imports for the
// analysis chain and the high-precision reference tables used by
// verification. Readers reject rather than coerce malformed data.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "slotsim/constants.hpp"
#include "slotsim/greens.hpp"
#include "slotsim/oracle.hpp"
#include "slotsim/reference.hpp"
#include "slotsim/spectrum.hpp"
#include "slotsim/table.hpp"

namespace slotsim {

/// Spectrum table with columns detuning/absorption[/std_err]. The detuning
/// unit must be declared on the units line: gamma0, MHz or rad_s; values are
/// normalized to gamma0 units internally (MHz converts by 2 pi 1e6 exactly).
inline Spectrum read_spectrum_table(const std::string& path, double gamma0) {
    const Table t = read_table(path);
    const int di = t.column_index("detuning");
    const int ai = t.column_index("absorption");
    const int ei = t.column_index("std_err");
    if (di < 0 || ai < 0)
        throw std::runtime_error("spectrum table needs detuning and absorption columns");

    const std::string unit = t.units[static_cast<std::size_t>(di)];
    double to_gamma0;
    if (unit == "gamma0") to_gamma0 = 1.0;
    else if (unit == "MHz") to_gamma0 = 2.0 * constants::pi * 1e6 / gamma0;
    else if (unit == "rad_s") to_gamma0 = 1.0 / gamma0;
    else
        throw std::runtime_error("spectrum table: detuning unit must be gamma0, MHz or rad_s, got '" +
                                 unit + "'");

    Spectrum s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        for (double v : row)
            if (!std::isfinite(v))
                throw std::runtime_error("spectrum table: non-finite value in row " +
                                         std::to_string(r + 1));
        s.detunings.push_back(row[static_cast<std::size_t>(di)] * to_gamma0);
        s.absorption.push_back(row[static_cast<std::size_t>(ai)]);
        if (ei >= 0) s.std_err.push_back(row[static_cast<std::size_t>(ei)]);
    }
    if (t.has_meta("seed")) s.seed = std::stoull(t.meta_value("seed"));
    if (t.has_meta("config_hash")) s.config_hash = t.meta_value("config_hash");
    if (t.has_meta("trials")) s.trials = std::stoi(t.meta_value("trials"));
    s.validate();
    return s;
}

inline void write_spectrum_table(const std::string& path, const Spectrum& s,
                                 std::vector<std::pair<std::string, std::string>> extra_meta = {}) {
    Table t;
    t.meta.emplace_back("config_hash", s.config_hash.empty() ? "none" : s.config_hash);
    t.meta.emplace_back("seed", std::to_string(s.seed));
    t.meta.emplace_back("trials", std::to_string(s.trials));
    if (s.failed_trials > 0)
        t.meta.emplace_back("failed_trials", std::to_string(s.failed_trials));
    for (auto& m : extra_meta) t.meta.push_back(std::move(m));
    t.columns = {"detuning", "absorption", "std_err"};
    t.units = {"gamma0", "population", "population"};
    for (std::size_t i = 0; i < s.detunings.size(); ++i)
        t.rows.push_back({s.detunings[i], s.absorption[i],
                          s.std_err.empty() ? 0.0 : s.std_err[i]});
    write_table(path, t);
}

// ---- committed reference tables -------------------------------------------------

/// Reference grids computed by the brute-force oracles, with provenance
/// metadata. Regeneration is deterministic; the files are committed so the
/// implementation-vs-oracle checks do not recompute references on every run.
inline std::vector<std::string> write_oracle_tables(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;

    {  // Faddeeva reference grid (series / continued fraction / quadrature regions)
        Table t;
        t.meta.emplace_back("table", "faddeeva_reference");
        t.meta.emplace_back("provenance",
                            "Maclaurin series (|z|<=4), Laplace continued fraction (|z|>=5.5), "
                            "trapezoid quadrature (annulus, Im z>=1); extended precision");
        t.columns = {"re_z", "im_z", "re_w", "im_w"};
        t.units = {"1", "1", "1", "1"};
        const double xs[] = {0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 3.9, -1.5, -3.0,
                             5.5, 6.0, 8.0, 12.0, 16.0, 20.0, -7.0, -20.0};
        const double ys[] = {0.0, 1e-4, 0.01, 0.3, 1.0, 2.5, 8.0, 15.0};
        for (double x : xs) {
            for (double y : ys) {
                const double r = std::hypot(x, y);
                if (r > 4.0 && r < 5.5) continue;
                if (r > 20.5) continue;
                const auto w = reference::faddeeva_reference({x, y});
                t.rows.push_back({x, y, w.real(), w.imag()});
            }
        }
        // annulus coverage away from the real axis
        for (double x : {3.2, 4.0, 4.4, -4.4, 5.0}) {
            for (double y : {1.0, 2.0, 3.0}) {
                const auto w = reference::faddeeva_reference({x, y});
                t.rows.push_back({x, y, w.real(), w.imag()});
            }
        }
        const std::string path = (fs::path(dir) / "faddeeva_grid.tsv").string();
        write_table(path, t);
        written.push_back(path);
    }

    {  // Green's-function samples by numerical differentiation of the scalar kernel
        Table t;
        t.meta.emplace_back("table", "greens_xx_reference");
        t.meta.emplace_back("provenance",
                            "8th-order finite difference of e^{iu}/(4 pi u) in extended precision");
        t.columns = {"k_r", "cos_x", "re_g", "im_g"};
        t.units = {"1", "1", "1", "1"};
        const double k = 1.0;
        for (double u : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
            for (int orient = 0; orient < 3; ++orient) {
                // head-to-tail (x), side-by-side (z), oblique
                Vec3 d;
                double cx;
                if (orient == 0) { d = {u, 0.0, 0.0}; cx = 1.0; }
                else if (orient == 1) { d = {0.0, 0.0, u}; cx = 0.0; }
                else { d = {u / std::sqrt(2.0), 0.0, u / std::sqrt(2.0)}; cx = 1.0 / std::sqrt(2.0); }
                const auto g = reference::greens_xx_reference(d, {0, 0, 0}, k);
                t.rows.push_back({u, cx, g.real(), g.imag()});
            }
        }
        const std::string path = (fs::path(dir) / "greens_samples.tsv").string();
        write_table(path, t);
        written.push_back(path);
    }

    {  // analytic Lorentzian Kramers-Kronig pair
        Table t;
        t.meta.emplace_back("table", "kk_lorentzian_pair");
        t.meta.emplace_back("provenance", "closed-form Hilbert pair, gamma = 1");
        t.columns = {"delta", "im_chi", "re_chi"};
        t.units = {"gamma", "1", "1"};
        const int n = 1601;
        const double span = 40.0;
        for (int i = 0; i < n; ++i) {
            const double d = -span + 2.0 * span * i / (n - 1);
            t.rows.push_back({d, reference::lorentzian_im(d, 1.0), reference::lorentzian_re(d, 1.0)});
        }
        const std::string path = (fs::path(dir) / "kk_lorentzian.tsv").string();
        write_table(path, t);
        written.push_back(path);
    }

    {  // two-atom Lindblad steady states at the standard side-by-side geometry
        Table t;
        t.meta.emplace_back("table", "lindblad_two_atom");
        t.meta.emplace_back("provenance",
                            "master-equation steady state, side-by-side pair at kR = 0.2, "
                            "drive on the shifted symmetric resonance");
        t.columns = {"omega0", "delta0", "sigma_ee"};
        t.units = {"gamma0", "gamma0", "population"};
        const double gamma0 = 1.0;
        const double u = 0.2;
        const std::vector<Vec3> pos = {{0, 0, 0}, {0, 0, u}};  // k = 1
        auto cm = coupling_matrices(pos, 1.0, nullptr, gamma0);
        const double delta0 = -cm.J(0, 1);
        for (double om : {0.03, 0.003, 0.0003}) {
            LindbladOptions opts;
            opts.t_max = 300.0;
            const auto r = lindblad_steady_state(cm, {om, om}, delta0, gamma0, opts);
            t.rows.push_back({om, delta0, r.sigma_ee(0)});
        }
        const std::string path = (fs::path(dir) / "lindblad_two_atom.tsv").string();
        write_table(path, t);
        written.push_back(path);
    }

    return written;
}

} // namespace slotsim
