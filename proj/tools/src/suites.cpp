#include "gpseg_cli/suites.hpp"

#include <string>

#include "gpseg/errors.hpp"

namespace gpseg::cli {

std::vector<Box> standard_obstacles() {
  return {
      {9.0, 2.0, 1.2, 1.2, 1.0},    {-12.0, 4.0, 1.5, 1.5, 1.2},  {15.0, -10.0, 2.0, 1.5, 1.0},
      {-6.0, -14.0, 1.0, 1.0, 1.0}, {22.0, 12.0, 2.0, 2.0, 1.5},  {-25.0, -8.0, 2.0, 2.0, 1.0},
      {30.0, -25.0, 2.5, 2.0, 1.5}, {-18.0, 20.0, 1.5, 1.5, 1.0}, {5.0, 25.0, 2.0, 1.0, 1.2},
      {40.0, 10.0, 2.0, 2.0, 1.5},  {-35.0, 30.0, 2.0, 2.0, 1.5}, {0.0, -40.0, 2.0, 2.0, 1.0},
  };
}

TerrainSpec suite_spec(std::string_view name, std::uint64_t seed) {
  TerrainSpec spec;
  spec.seed = seed;
  spec.noise_sigma = 0.02;
  spec.obstacles = standard_obstacles();
  if (name == "flat") {
    spec.kind = terrain::Flat{};
  } else if (name == "sloped") {
    spec.kind = terrain::Sloped{0.15};
  } else if (name == "piecewise") {
    spec.kind = terrain::Piecewise{{20.0}, {0.0, 0.15}};
  } else if (name == "bumpy") {
    spec.kind = terrain::Bumpy{0.3, 15.0, 0.0};
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown preset '" + std::string(name) + "'");
  }
  return spec;
}

}  // namespace gpseg::cli
