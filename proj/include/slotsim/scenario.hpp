#pragma once

// Scenario-file ingestion: strict JSON schema (unknown keys rejected), the
// resolved-config serialization every run emits, and the content hash that
// ties output tables to their configuration.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slotsim/dynamics.hpp"
#include "slotsim/mode.hpp"
#include "slotsim/params.hpp"

namespace slotsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepType { detuning, intensity, density, box_length };
enum class ModeKind { analytic, file, none };

struct SweepSpec {
    SweepType type = SweepType::detuning;
    std::vector<double> values;     // resolved to SI (W/m^2, 1/m^3 or m)
    double detuning_min = -20.0;    // gamma0 units
    double detuning_max = 20.0;
    int detuning_points = 41;

    std::vector<double> detuning_grid() const {
        std::vector<double> g(static_cast<std::size_t>(detuning_points));
        for (int i = 0; i < detuning_points; ++i)
            g[static_cast<std::size_t>(i)] =
                detuning_min + (detuning_max - detuning_min) * i /
                                   std::max(1, detuning_points - 1);
        return g;
    }
};

struct ScenarioSpec {
    PhysicalParams physics;

    Vec3 box_extents{};
    std::optional<SlotGeometry> slot;

    ModeKind mode_kind = ModeKind::none;
    double pf_max = 35.0;
    double mode_decay_length = 50e-9;
    double mode_resolution = 2e-9;
    std::string mode_path;

    double density = 0.0;
    double mass = constants::mass_rb85;
    double dt = 0.0;                 // s; 0 = derive from the scenario
    double t_total_gamma0 = 6.0;     // in units of 1/gamma0
    double transient_discard = 0.0;
    std::vector<Vec3> positions;     // optional pinned positions

    bool drive_by_intensity = false;
    double intensity = 0.0;          // W/m^2
    double omega0_peak_gamma0 = 0.0;

    bool waveguide = true;
    bool dipole_dipole = true;
    double exclusion_radius = -1.0;  // m; <0 = lambda/50 default
    int refresh_stride = 1;
    bool check_psd = false;

    double cp_offset_gamma0 = -70.0;  // reporting-layer Casimir-Polder offset
    double omega_d_gamma0 = 0.0;      // fit Gaussian FWHM; 0 = from temperature

    SweepSpec sweep;

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int trials = 1;
    int workers = 0;  // 0 = decide at run time
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("field '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_required(const nlohmann::json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

} // namespace detail

inline ScenarioSpec parse_scenario(const nlohmann::json& j) {
    using nlohmann::json;
    detail::require_keys(j, "scenario",
                         {"physics", "box", "mode", "ensemble", "drive", "coupling", "report",
                          "sweep", "output", "seed", "trials", "workers"});
    ScenarioSpec s;

    if (j.contains("physics")) {
        const auto& p = j.at("physics");
        detail::require_keys(p, "physics",
                             {"lambda_probe_m", "n_eff", "gamma0_rad_s", "i_sat_w_m2",
                              "temperature_K", "l_interaction_m"});
        s.physics.lambda_probe = detail::get_or(p, "lambda_probe_m", s.physics.lambda_probe);
        s.physics.n_eff = detail::get_or(p, "n_eff", s.physics.n_eff);
        s.physics.gamma0 = detail::get_or(p, "gamma0_rad_s", s.physics.gamma0);
        s.physics.i_sat = detail::get_or(p, "i_sat_w_m2", s.physics.i_sat);
        s.physics.temperature = detail::get_or(p, "temperature_K", s.physics.temperature);
        s.physics.l_interaction = detail::get_or(p, "l_interaction_m", s.physics.l_interaction);
        s.physics.validate();
    }

    {
        const auto& b = j.at("box");
        detail::require_keys(b, "box", {"extents_m", "slot"});
        const auto ext = detail::get_required<std::vector<double>>(b, "box", "extents_m");
        if (ext.size() != 3) throw ConfigError("box.extents_m: need exactly 3 lengths");
        s.box_extents = {ext[0], ext[1], ext[2]};
        if (b.contains("slot")) {
            const auto& sl = b.at("slot");
            detail::require_keys(sl, "box.slot", {"ridge_width_m", "ridge_height_m", "gap_m"});
            SlotGeometry slot;
            slot.ridge_width = detail::get_or(sl, "ridge_width_m", slot.ridge_width);
            slot.ridge_height = detail::get_or(sl, "ridge_height_m", slot.ridge_height);
            slot.gap = detail::get_or(sl, "gap_m", slot.gap);
            s.slot = slot;
        }
    }

    {
        const auto& m = j.at("mode");
        detail::require_keys(m, "mode",
                             {"type", "pf_max", "decay_length_m", "resolution_m", "path"});
        const auto type = detail::get_required<std::string>(m, "mode", "type");
        if (type == "analytic") s.mode_kind = ModeKind::analytic;
        else if (type == "file") s.mode_kind = ModeKind::file;
        else if (type == "none") s.mode_kind = ModeKind::none;
        else throw ConfigError("mode.type must be analytic, file or none");
        s.pf_max = detail::get_or(m, "pf_max", s.pf_max);
        s.mode_decay_length = detail::get_or(m, "decay_length_m", s.mode_decay_length);
        s.mode_resolution = detail::get_or(m, "resolution_m", s.mode_resolution);
        s.mode_path = detail::get_or<std::string>(m, "path", "");
        if (s.mode_kind == ModeKind::file && s.mode_path.empty())
            throw ConfigError("mode.path required for mode.type = file");
        if (s.mode_kind == ModeKind::analytic && !s.slot)
            throw ConfigError("mode.type = analytic requires box.slot");
    }

    {
        const auto& e = j.at("ensemble");
        detail::require_keys(e, "ensemble",
                             {"density_per_m3", "normalized_density", "mass_kg", "dt_s",
                              "t_total_gamma0", "transient_discard", "positions_m"});
        const bool has_n = e.contains("density_per_m3");
        const bool has_nu = e.contains("normalized_density");
        if (has_n == has_nu)
            throw ConfigError("ensemble: give exactly one of density_per_m3 or normalized_density");
        if (has_n) s.density = detail::get_required<double>(e, "ensemble", "density_per_m3");
        else
            s.density = density_from_normalized(
                detail::get_required<double>(e, "ensemble", "normalized_density"),
                s.physics.k());
        s.mass = detail::get_or(e, "mass_kg", s.mass);
        s.dt = detail::get_or(e, "dt_s", 0.0);
        s.t_total_gamma0 = detail::get_or(e, "t_total_gamma0", s.t_total_gamma0);
        s.transient_discard = detail::get_or(e, "transient_discard", 0.0);
        if (e.contains("positions_m")) {
            for (const auto& row : e.at("positions_m")) {
                const auto v = row.get<std::vector<double>>();
                if (v.size() != 3) throw ConfigError("ensemble.positions_m: rows need 3 entries");
                s.positions.push_back({v[0], v[1], v[2]});
            }
        }
    }

    {
        const auto& d = j.at("drive");
        detail::require_keys(d, "drive", {"intensity_w_m2", "omega0_peak_gamma0"});
        const bool has_i = d.contains("intensity_w_m2");
        const bool has_o = d.contains("omega0_peak_gamma0");
        if (has_i == has_o)
            throw ConfigError("drive: give exactly one of intensity_w_m2 or omega0_peak_gamma0");
        s.drive_by_intensity = has_i;
        if (has_i) s.intensity = detail::get_required<double>(d, "drive", "intensity_w_m2");
        else s.omega0_peak_gamma0 = detail::get_required<double>(d, "drive", "omega0_peak_gamma0");
    }

    if (j.contains("coupling")) {
        const auto& c = j.at("coupling");
        detail::require_keys(c, "coupling",
                             {"waveguide", "dipole_dipole", "exclusion_radius_m",
                              "refresh_stride", "check_psd"});
        s.waveguide = detail::get_or(c, "waveguide", true);
        s.dipole_dipole = detail::get_or(c, "dipole_dipole", true);
        s.exclusion_radius = detail::get_or(c, "exclusion_radius_m", -1.0);
        s.refresh_stride = detail::get_or(c, "refresh_stride", 1);
        s.check_psd = detail::get_or(c, "check_psd", false);
        if (s.refresh_stride < 1) throw ConfigError("coupling.refresh_stride must be >= 1");
    }

    if (j.contains("report")) {
        const auto& r = j.at("report");
        detail::require_keys(r, "report", {"cp_offset_gamma0", "omega_d_gamma0"});
        s.cp_offset_gamma0 = detail::get_or(r, "cp_offset_gamma0", s.cp_offset_gamma0);
        s.omega_d_gamma0 = detail::get_or(r, "omega_d_gamma0", 0.0);
    }

    {
        const auto& sw = j.at("sweep");
        detail::require_keys(sw, "sweep",
                             {"type", "values", "value_unit", "detuning_min_gamma0",
                              "detuning_max_gamma0", "detuning_points"});
        const auto type = detail::get_required<std::string>(sw, "sweep", "type");
        s.sweep.detuning_min = detail::get_or(sw, "detuning_min_gamma0", s.sweep.detuning_min);
        s.sweep.detuning_max = detail::get_or(sw, "detuning_max_gamma0", s.sweep.detuning_max);
        s.sweep.detuning_points = detail::get_or(sw, "detuning_points", s.sweep.detuning_points);
        if (s.sweep.detuning_points < 2 || !(s.sweep.detuning_min < s.sweep.detuning_max))
            throw ConfigError("sweep: invalid detuning grid");

        const std::string unit = detail::get_or<std::string>(sw, "value_unit", "");
        std::vector<double> values;
        if (sw.contains("values")) values = sw.at("values").get<std::vector<double>>();

        if (type == "detuning") {
            s.sweep.type = SweepType::detuning;
            if (!values.empty()) throw ConfigError("sweep.values not allowed for detuning sweep");
        } else if (type == "intensity") {
            s.sweep.type = SweepType::intensity;
            if (values.empty()) throw ConfigError("sweep.values required for intensity sweep");
            for (double v : values) {
                if (unit == "w_m2") s.sweep.values.push_back(v);
                else if (unit == "isat") s.sweep.values.push_back(v * s.physics.i_sat);
                else if (unit == "omega0_gamma0") {
                    const double om = v * s.physics.gamma0;
                    s.sweep.values.push_back(LaserDrive::from_rabi(om, s.physics).intensity);
                } else
                    throw ConfigError("sweep.value_unit must be w_m2, isat or omega0_gamma0");
            }
        } else if (type == "density") {
            s.sweep.type = SweepType::density;
            if (values.empty()) throw ConfigError("sweep.values required for density sweep");
            for (double v : values) {
                if (unit == "per_m3") s.sweep.values.push_back(v);
                else if (unit == "normalized")
                    s.sweep.values.push_back(density_from_normalized(v, s.physics.k()));
                else
                    throw ConfigError("sweep.value_unit must be per_m3 or normalized");
            }
        } else if (type == "box_length") {
            s.sweep.type = SweepType::box_length;
            if (values.empty()) throw ConfigError("sweep.values required for box_length sweep");
            for (double v : values) {
                if (unit == "m") s.sweep.values.push_back(v);
                else if (unit == "lambda") s.sweep.values.push_back(v * s.physics.lambda_probe);
                else
                    throw ConfigError("sweep.value_unit must be m or lambda");
            }
        } else {
            throw ConfigError("sweep.type must be detuning, intensity, density or box_length");
        }
    }

    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::require_keys(o, "output", {"dir"});
        s.output_dir = detail::get_or<std::string>(o, "dir", s.output_dir);
    }
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    s.trials = detail::get_required<int>(j, "scenario", "trials");
    if (s.trials < 1) throw ConfigError("trials must be >= 1");
    s.workers = detail::get_or(j, "workers", 0);
    return s;
}

inline ScenarioSpec parse_scenario_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
    }
    return parse_scenario(j);
}

/// Canonical resolved configuration (all defaults applied, sorted keys).
inline nlohmann::json resolved_config(const ScenarioSpec& s) {
    nlohmann::json j;
    j["physics"] = {{"lambda_probe_m", s.physics.lambda_probe},
                    {"n_eff", s.physics.n_eff},
                    {"gamma0_rad_s", s.physics.gamma0},
                    {"i_sat_w_m2", s.physics.i_sat},
                    {"temperature_K", s.physics.temperature},
                    {"l_interaction_m", s.physics.l_interaction}};
    j["box"]["extents_m"] = {s.box_extents.x, s.box_extents.y, s.box_extents.z};
    if (s.slot)
        j["box"]["slot"] = {{"ridge_width_m", s.slot->ridge_width},
                            {"ridge_height_m", s.slot->ridge_height},
                            {"gap_m", s.slot->gap}};
    j["mode"]["type"] = s.mode_kind == ModeKind::analytic ? "analytic"
                        : s.mode_kind == ModeKind::file   ? "file"
                                                          : "none";
    if (s.mode_kind == ModeKind::analytic) {
        j["mode"]["pf_max"] = s.pf_max;
        j["mode"]["decay_length_m"] = s.mode_decay_length;
        j["mode"]["resolution_m"] = s.mode_resolution;
    }
    if (s.mode_kind == ModeKind::file) j["mode"]["path"] = s.mode_path;
    j["ensemble"] = {{"density_per_m3", s.density},
                     {"mass_kg", s.mass},
                     {"dt_s", s.dt},
                     {"t_total_gamma0", s.t_total_gamma0},
                     {"transient_discard", s.transient_discard}};
    if (!s.positions.empty()) {
        auto& arr = j["ensemble"]["positions_m"];
        for (const auto& p : s.positions) arr.push_back({p.x, p.y, p.z});
    }
    if (s.drive_by_intensity) j["drive"]["intensity_w_m2"] = s.intensity;
    else j["drive"]["omega0_peak_gamma0"] = s.omega0_peak_gamma0;
    j["coupling"] = {{"waveguide", s.waveguide},
                     {"dipole_dipole", s.dipole_dipole},
                     {"exclusion_radius_m", s.exclusion_radius},
                     {"refresh_stride", s.refresh_stride},
                     {"check_psd", s.check_psd}};
    j["report"] = {{"cp_offset_gamma0", s.cp_offset_gamma0},
                   {"omega_d_gamma0", s.omega_d_gamma0}};
    j["sweep"]["type"] = s.sweep.type == SweepType::detuning    ? "detuning"
                         : s.sweep.type == SweepType::intensity ? "intensity"
                         : s.sweep.type == SweepType::density   ? "density"
                                                                : "box_length";
    if (!s.sweep.values.empty()) {
        j["sweep"]["values"] = s.sweep.values;
        j["sweep"]["value_unit"] = "si";
    }
    j["sweep"]["detuning_min_gamma0"] = s.sweep.detuning_min;
    j["sweep"]["detuning_max_gamma0"] = s.sweep.detuning_max;
    j["sweep"]["detuning_points"] = s.sweep.detuning_points;
    j["output"]["dir"] = s.output_dir;
    j["seed"] = s.seed;
    j["trials"] = s.trials;
    return j;
}

/// FNV-1a 64-bit over the canonical config dump, as a fixed-width hex string.
/// The output location is excluded: the hash identifies the physics run.
inline std::string config_hash(const ScenarioSpec& s) {
    nlohmann::json j = resolved_config(s);
    j.erase("output");
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

/// Materialize the simulation Scenario (box, mode map, ensemble) from a spec.
inline Scenario build_scenario(const ScenarioSpec& s) {
    Scenario sc;
    sc.physics = s.physics;
    sc.box = s.slot ? SimulationBox::with_slot(s.box_extents, *s.slot)
                    : SimulationBox::vacuum(s.box_extents);

    if (s.mode_kind == ModeKind::analytic) {
        sc.mode = std::make_shared<ModeProfile>(analytic_fallback_profile(
            s.physics, *s.slot, s.pf_max, s.mode_decay_length, 0.5 * s.box_extents.x,
            0.5 * s.box_extents.y, s.mode_resolution));
    } else if (s.mode_kind == ModeKind::file) {
        sc.mode = std::make_shared<ModeProfile>(load_mode_profile(s.mode_path, s.physics.k()));
    }

    sc.ensemble.density = s.density;
    sc.ensemble.n_atoms = s.positions.empty()
                              ? EnsembleConfig::atoms_for_density(s.density, sc.box)
                              : s.positions.size();
    if (sc.ensemble.n_atoms == 0)
        throw ConfigError("density * free volume rounds to zero atoms");
    sc.ensemble.temperature = s.physics.temperature;
    sc.ensemble.mass = s.mass;
    sc.ensemble.seed = s.seed;
    sc.ensemble.transient_discard = s.transient_discard;
    sc.pinned_positions = s.positions;

    sc.coupling.waveguide = s.waveguide;
    sc.coupling.exclusion_radius = s.exclusion_radius >= 0.0
                                       ? s.exclusion_radius
                                       : default_exclusion_radius(s.physics.lambda_probe);
    sc.coupling.check_psd = s.check_psd;
    sc.dipole_dipole = s.dipole_dipole;
    sc.refresh_stride = s.refresh_stride;

    const double pf_for_dt = (s.mode_kind != ModeKind::none && s.waveguide)
                                 ? (sc.mode ? sc.mode->pf_max() : 1.0)
                                 : 1.0;
    EnsembleConfig& e = sc.ensemble;
    e.dt = s.dt > 0.0 ? s.dt
                      : default_time_step(s.physics, sc.box, pf_for_dt, e.sigma_v(),
                                          sc.coupling.exclusion_radius);
    e.t_total = s.t_total_gamma0 / s.physics.gamma0;

    sc.drive = s.drive_by_intensity
                   ? LaserDrive::from_intensity(s.intensity, s.physics)
                   : LaserDrive::from_rabi(s.omega0_peak_gamma0 * s.physics.gamma0, s.physics);

    sc.detunings_gamma0 = s.sweep.detuning_grid();
    sc.trials = s.trials;
    sc.config_hash = config_hash(s);
    return sc;
}

} // namespace slotsim
