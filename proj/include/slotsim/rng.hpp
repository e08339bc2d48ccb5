#pragma once

// Counter-based random number generation (Philox4x32-10).
//
// Streams are keyed by (seed, trial, atom) so that trajectories are
// reproducible independently of worker count and evaluation order.

#include <array>
#include <cmath>
#include <cstdint>

#include "slotsim/constants.hpp"

namespace slotsim {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace detail

/// One Philox4x32-10 block: 4 output words from a 128-bit counter and 64-bit key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key);
        key[0] += W0;
        key[1] += W1;
    }
    return counter;
}

/// Deterministic stream of uniforms/gaussians for one (seed, trial, atom) triple.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint32_t trial, std::uint32_t atom)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          prefix_{trial, atom} {}

    std::uint32_t next_u32() {
        if (index_ == 4) refill();
        return block_[index_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    /// Standard normal via Box-Muller (consumes two uniforms per pair).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * constants::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Speed drawn from the one-sided flux distribution f(v) ~ v exp(-v^2 / 2 sigma^2).
    double flux_speed(double sigma) {
        return sigma * std::sqrt(-2.0 * std::log(uniform_pos()));
    }

  private:
    void refill() {
        block_ = philox4x32({static_cast<std::uint32_t>(counter_),
                             static_cast<std::uint32_t>(counter_ >> 32),
                             prefix_[0], prefix_[1]},
                            key_);
        ++counter_;
        index_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> prefix_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int index_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace slotsim
