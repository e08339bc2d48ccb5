#pragma once

#include <string>

namespace slotsim {

inline std::string version_string() { return "slotsim 0.1.0"; }

} // namespace slotsim
