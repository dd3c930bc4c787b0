#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gpseg/synth.hpp"

namespace gpseg::cli {

/// Twelve boxes spread over all quadrants between 8 m and 50 m.
std::vector<Box> standard_obstacles();

/// Named terrain presets with the standard obstacles and 2 cm noise:
/// "flat", "sloped" (grade 0.15), "piecewise" (flat then 0.15 past 20 m),
/// "bumpy" (0.3 m amplitude, 15 m wavelength). Throws InvalidSpec for other names.
TerrainSpec suite_spec(std::string_view name, std::uint64_t seed);

inline constexpr std::string_view kSuiteNames[] = {"flat", "sloped", "piecewise", "bumpy"};

}  // namespace gpseg::cli
