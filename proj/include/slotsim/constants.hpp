#pragma once

namespace slotsim::constants {

inline constexpr double pi          = 3.14159265358979323846;
inline constexpr double c_light     = 2.99792458e8;      // m/s
inline constexpr double hbar        = 1.054571817e-34;   // J s
inline constexpr double k_boltzmann = 1.380649e-23;      // J/K
inline constexpr double mass_rb85   = 1.40999342e-25;    // kg

} // namespace slotsim::constants
