#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "slotsim/ensemble.hpp"

using namespace slotsim;
using Catch::Approx;

namespace {

EnsembleConfig small_config(std::size_t n, double temperature) {
    EnsembleConfig cfg;
    cfg.n_atoms = n;
    cfg.temperature = temperature;
    cfg.seed = 99;
    cfg.dt = 1e-10;
    cfg.t_total = 1e-8;
    return cfg;
}

} // namespace

TEST_CASE("atoms_for_density") {
    auto box = SimulationBox::vacuum({1e-6, 1e-6, 1e-6});
    CHECK(EnsembleConfig::atoms_for_density(4.2e19, box) == 42);
    CHECK_THROWS_AS(EnsembleConfig::atoms_for_density(-1.0, box), std::domain_error);
}

TEST_CASE("sampling: ground state, free volume, thermal statistics") {
    SlotGeometry slot;
    auto box = SimulationBox::with_slot({800e-9, 450e-9, 2e-6}, slot);
    const double temp = 450.0;
    auto cfg = small_config(2000, temp);
    const auto atoms = sample_atoms(cfg, box, 0);

    double vz_sum = 0.0, v2_sum = 0.0;
    for (const auto& a : atoms) {
        REQUIRE(box.in_free_volume(a.position));
        REQUIRE(a.sigma_ee == 0.0);
        REQUIRE(a.sigma_gg == 1.0);
        vz_sum += a.velocity.z;
        v2_sum += a.velocity.norm2();
    }
    const double n = static_cast<double>(atoms.size());
    const double sigma = cfg.sigma_v();
    // mean v_z = 0 within 3 standard errors; mean |v|^2 = 3 kT/m within a few %
    CHECK(std::abs(vz_sum / n) < 3.0 * sigma / std::sqrt(n));
    CHECK(v2_sum / n == Approx(3.0 * sigma * sigma).epsilon(0.05));
}

TEST_CASE("T -> 0 gives zero velocities") {
    auto box = SimulationBox::vacuum({1e-6, 1e-6, 1e-6});
    auto cfg = small_config(10, 0.0);
    for (const auto& a : sample_atoms(cfg, box, 0)) {
        CHECK(a.velocity.x == 0.0);
        CHECK(a.velocity.y == 0.0);
        CHECK(a.velocity.z == 0.0);
    }
}

TEST_CASE("identical seed gives identical ensembles") {
    auto box = SimulationBox::vacuum({1e-6, 1e-6, 1e-6});
    auto cfg = small_config(50, 300.0);
    const auto a = sample_atoms(cfg, box, 3);
    const auto b = sample_atoms(cfg, box, 3);
    const auto c = sample_atoms(cfg, box, 4);
    bool all_equal = true, any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        all_equal = all_equal && a[i].position.x == b[i].position.x &&
                    a[i].velocity.z == b[i].velocity.z;
        any_diff = any_diff || a[i].position.x != c[i].position.x;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("ballistic step without collisions") {
    auto box = SimulationBox::vacuum({1e-5, 1e-5, 1e-5});
    std::vector<AtomState> atoms(1);
    atoms[0].position = {0, 0, 0};
    atoms[0].velocity = {100.0, -50.0, 20.0};
    atoms[0].sigma_ee = 0.4;
    atoms[0].sigma_gg = 0.6;
    std::vector<RngStream> streams;
    streams.emplace_back(1, 0, 0);
    const auto ev = advance_positions(atoms, box, 1e-9, streams, 0.0);
    CHECK(ev.box_exits == 0);
    CHECK(ev.dielectric_hits == 0);
    CHECK(atoms[0].position.x == Approx(100.0 * 1e-9));
    CHECK(atoms[0].sigma_ee == 0.4);  // no reset
}

TEST_CASE("box exit resets the spin and respawns on the crossed face") {
    auto box = SimulationBox::vacuum({1e-6, 1e-6, 1e-6});
    std::vector<AtomState> atoms(1);
    atoms[0].position = {0, 0, 0.49e-6};
    atoms[0].velocity = {0, 0, 300.0};
    atoms[0].sigma_ee = 0.4;
    atoms[0].sigma_gg = 0.6;
    atoms[0].sigma_ge = {0.2, 0.1};
    std::vector<RngStream> streams;
    streams.emplace_back(1, 0, 0);
    const auto ev = advance_positions(atoms, box, 1e-9, streams, 200.0);
    CHECK(ev.box_exits == 1);
    CHECK(atoms[0].sigma_ee == 0.0);
    CHECK(atoms[0].sigma_ge == std::complex<double>{});
    CHECK(atoms[0].position.z == Approx(0.5e-6));  // respawned on the +z face
    CHECK(atoms[0].velocity.z < 0.0);              // moving inward
    CHECK(box.in_free_volume(atoms[0].position));
}

TEST_CASE("dielectric hit reflects specularly and resets the spin") {
    SlotGeometry slot;
    auto box = SimulationBox::with_slot({800e-9, 450e-9, 2e-6}, slot);
    std::vector<AtomState> atoms(1);
    // heading straight at the right ridge inner face at x = 25 nm
    atoms[0].position = {10e-9, 0, 0};
    atoms[0].velocity = {100.0, 0, 0};
    atoms[0].sigma_ee = 0.25;
    atoms[0].sigma_gg = 0.75;
    std::vector<RngStream> streams;
    streams.emplace_back(1, 0, 0);
    const auto ev = advance_positions(atoms, box, 0.5e-9, streams, 0.0);
    CHECK(ev.dielectric_hits == 1);
    CHECK(atoms[0].sigma_ee == 0.0);
    CHECK(atoms[0].velocity.x == -100.0);
    // 10 -> 25, reflected back 35 nm of remaining travel: ends at x = -10 nm
    CHECK(atoms[0].position.x == Approx(-10e-9).epsilon(1e-9));
    CHECK(box.in_free_volume(atoms[0].position));
}

TEST_CASE("number conservation and confinement over many steps") {
    SlotGeometry slot;
    auto box = SimulationBox::with_slot({800e-9, 450e-9, 2e-6}, slot);
    auto cfg = small_config(200, 450.0);
    auto atoms = sample_atoms(cfg, box, 1);
    std::vector<RngStream> streams;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        streams.emplace_back(cfg.seed, 1, static_cast<std::uint32_t>(i));
    const double dt = 2e-10;
    std::size_t exits = 0;
    for (int step = 0; step < 2000; ++step) {
        const auto ev = advance_positions(atoms, box, dt, streams, cfg.sigma_v());
        exits += ev.box_exits;
        REQUIRE(atoms.size() == 200);
    }
    for (const auto& a : atoms) REQUIRE(box.in_free_volume(a.position));
    CHECK(exits > 0);  // thermal atoms do traverse the box
}

TEST_CASE("long-run spatial distribution stays uniform over the free volume") {
    auto box = SimulationBox::vacuum({1e-6, 1e-6, 1e-6});
    auto cfg = small_config(400, 450.0);
    auto atoms = sample_atoms(cfg, box, 2);
    std::vector<RngStream> streams;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        streams.emplace_back(cfg.seed, 2, static_cast<std::uint32_t>(i));

    // 8-cell octant partition, counts accumulated over time
    std::array<double, 8> counts{};
    double total = 0.0;
    const double dt = 2e-10;
    for (int step = 0; step < 3000; ++step) {
        advance_positions(atoms, box, dt, streams, cfg.sigma_v());
        if (step < 500) continue;  // let the flux respawns mix
        for (const auto& a : atoms) {
            const int idx = (a.position.x > 0 ? 1 : 0) + (a.position.y > 0 ? 2 : 0) +
                            (a.position.z > 0 ? 4 : 0);
            counts[static_cast<std::size_t>(idx)] += 1.0;
            total += 1.0;
        }
    }
    // effective sample count: atoms decorrelate over a traversal, not per step
    const double sigma_v = cfg.sigma_v();
    const double traversal_steps = 1e-6 / (sigma_v * dt);
    const double n_eff = total / traversal_steps;
    const double p = 1.0 / 8.0;
    const double sigma = std::sqrt(p * (1.0 - p) / n_eff);
    for (double c : counts)
        CHECK(std::abs(c / total - p) < 3.0 * sigma);
}
