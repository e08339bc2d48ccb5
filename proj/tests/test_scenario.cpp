#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slotsim/runner.hpp"
#include "slotsim/scenario.hpp"

using namespace slotsim;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_json() {
    return nlohmann::json::parse(R"({
      "physics": {"gamma0_rad_s": 11876096.0, "temperature_K": 0.0},
      "box": {"extents_m": [6e-7, 6e-7, 1.25e-6]},
      "mode": {"type": "none"},
      "ensemble": {"normalized_density": 2.0, "t_total_gamma0": 2.0,
                   "transient_discard": 0.5},
      "drive": {"omega0_peak_gamma0": 0.01},
      "coupling": {"waveguide": false},
      "sweep": {"type": "detuning", "detuning_min_gamma0": -4, "detuning_max_gamma0": 4,
                "detuning_points": 17},
      "seed": 11,
      "trials": 2
    })");
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("scenario parsing applies defaults and units") {
    const auto spec = parse_scenario(minimal_json());
    CHECK(spec.physics.lambda_probe == Approx(1529e-9));
    CHECK(spec.physics.gamma0 == Approx(11876096.0));
    CHECK(spec.density ==
          Approx(density_from_normalized(2.0, spec.physics.k())).epsilon(1e-12));
    CHECK(spec.trials == 2);
    CHECK(spec.cp_offset_gamma0 == -70.0);
    CHECK(!spec.waveguide);
    CHECK(spec.sweep.detuning_grid().size() == 17);
    CHECK(spec.sweep.detuning_grid().front() == -4.0);
    CHECK(spec.sweep.detuning_grid().back() == 4.0);
}

TEST_CASE("scenario rejects unknown keys with a path diagnostic") {
    auto j = minimal_json();
    j["physics"]["lambda"] = 1.0;
    CHECK_THROWS_WITH(parse_scenario(j), Catch::Matchers::ContainsSubstring("physics") &&
                                             Catch::Matchers::ContainsSubstring("lambda"));
    auto j2 = minimal_json();
    j2["frobnicate"] = true;
    CHECK_THROWS_WITH(parse_scenario(j2), Catch::Matchers::ContainsSubstring("frobnicate"));
}

TEST_CASE("scenario validation errors") {
    auto j = minimal_json();
    j["ensemble"]["density_per_m3"] = 1e19;  // both density forms present
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);

    auto j2 = minimal_json();
    j2["drive"] = {{"intensity_w_m2", 1.0}, {"omega0_peak_gamma0", 0.1}};
    CHECK_THROWS_AS(parse_scenario(j2), ConfigError);

    auto j3 = minimal_json();
    j3["sweep"]["type"] = "intensity";
    CHECK_THROWS_AS(parse_scenario(j3), ConfigError);  // values missing

    auto j4 = minimal_json();
    j4.erase("trials");
    CHECK_THROWS_AS(parse_scenario(j4), ConfigError);

    auto j5 = minimal_json();
    j5["mode"]["type"] = "analytic";  // requires box.slot
    CHECK_THROWS_AS(parse_scenario(j5), ConfigError);
}

TEST_CASE("config hash is stable and key-order independent") {
    const auto a = parse_scenario(minimal_json());
    auto j = minimal_json();
    // same content, different insertion order
    auto seed = j["seed"];
    j.erase("seed");
    j["seed"] = seed;
    const auto b = parse_scenario(j);
    CHECK(config_hash(a) == config_hash(b));

    auto j2 = minimal_json();
    j2["seed"] = 12;
    CHECK(config_hash(a) != config_hash(parse_scenario(j2)));
}

TEST_CASE("build_scenario materializes box, atoms and time step") {
    auto j = minimal_json();
    const auto spec = parse_scenario(j);
    const auto sc = build_scenario(spec);
    CHECK(sc.ensemble.n_atoms ==
          EnsembleConfig::atoms_for_density(spec.density, sc.box));
    CHECK(sc.ensemble.dt > 0.0);
    CHECK(sc.ensemble.t_total == Approx(2.0 / spec.physics.gamma0));
    CHECK(sc.mode == nullptr);
    CHECK(sc.coupling.exclusion_radius ==
          Approx(default_exclusion_radius(spec.physics.lambda_probe)));
}

TEST_CASE("slot + analytic mode scenario builds a profile covering the box") {
    auto j = minimal_json();
    j["box"]["extents_m"] = {8e-7, 4.5e-7, 2e-6};
    j["box"]["slot"] = {{"ridge_width_m", 3e-7}, {"ridge_height_m", 2.5e-7}, {"gap_m", 5e-8}};
    j["mode"] = {{"type", "analytic"}, {"pf_max", 35.0}, {"resolution_m", 4e-9}};
    j["coupling"] = {{"waveguide", true}};
    const auto sc = build_scenario(parse_scenario(j));
    REQUIRE(sc.mode != nullptr);
    CHECK(sc.mode->purcell(0, 0) == Approx(35.0).epsilon(1e-6));
    CHECK(sc.mode->contains(3.9e-7, 2.2e-7));
    CHECK(sc.ensemble.dt <= 1.0 / (200.0 * sc.physics.gamma0 * 35.0));
}

TEST_CASE("end-to-end run: files written, reruns byte-identical across workers") {
    const auto dir1 = fs::temp_directory_path() / "slotsim_run1";
    const auto dir2 = fs::temp_directory_path() / "slotsim_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    const auto spec = parse_scenario(minimal_json());

    RunOptions o1;
    o1.output_dir_override = dir1.string();
    o1.workers = 1;
    o1.verbosity = 0;
    RunOptions o2;
    o2.output_dir_override = dir2.string();
    o2.workers = 3;
    o2.verbosity = 0;

    const auto r1 = run_scenario(spec, o1);
    const auto r2 = run_scenario(spec, o2);
    CHECK(r1.flagged_rows == 0);

    REQUIRE(fs::exists(dir1 / "spectrum_000.tsv"));
    REQUIRE(fs::exists(dir1 / "fits.tsv"));
    REQUIRE(fs::exists(dir1 / "resolved_config.json"));
    REQUIRE(fs::exists(dir1 / "manifest.txt"));

    // identical seed + config, different worker count: byte-identical tables
    CHECK(slurp(dir1 / "spectrum_000.tsv") == slurp(dir2 / "spectrum_000.tsv"));
    CHECK(slurp(dir1 / "fits.tsv") == slurp(dir2 / "fits.tsv"));
    // resolved configs agree up to the output destination
    auto ja = nlohmann::json::parse(slurp(dir1 / "resolved_config.json"));
    auto jb = nlohmann::json::parse(slurp(dir2 / "resolved_config.json"));
    ja.erase("output");
    jb.erase("output");
    CHECK(ja == jb);

    // manifest records the hash that the tables carry
    const auto manifest = slurp(dir1 / "manifest.txt");
    CHECK(manifest.find(config_hash(spec)) != std::string::npos);
}

TEST_CASE("committed example scenarios parse") {
    const fs::path dir = fs::path(SLOTSIM_SOURCE_DIR) / "scenarios";
    REQUIRE(fs::exists(dir));
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        CHECK_NOTHROW(parse_scenario_file(entry.path().string()));
        ++count;
    }
    CHECK(count >= 3);
}
