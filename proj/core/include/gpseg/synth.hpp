#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <variant>
#include <vector>

#include "gpseg/io.hpp"

namespace gpseg {

namespace terrain {
struct Flat {};
struct Sloped {
  double grade = 0.0;
};
/// z = amplitude * sin(2 pi r / wavelength) * (1 + angular_modulation * cos(phi)).
struct Bumpy {
  double amplitude = 0.0;
  double wavelength = 1.0;
  double angular_modulation = 0.0;
};
/// Continuous piecewise-linear profile in r: grades[k] applies between
/// breakpoints[k-1] and breakpoints[k]; grades has one more entry.
struct Piecewise {
  std::vector<double> breakpoints;
  std::vector<double> grades;
};
}  // namespace terrain

using TerrainKind = std::variant<terrain::Flat, terrain::Sloped, terrain::Bumpy, terrain::Piecewise>;

/// Axis-aligned box standing on the terrain.
struct Box {
  double center_x = 0.0;
  double center_y = 0.0;
  double extent_x = 1.0;
  double extent_y = 1.0;
  double height = 1.0;

  bool covers(double x, double y) const noexcept;
};

struct TerrainSpec {
  TerrainKind kind = terrain::Flat{};
  std::vector<Box> obstacles;
  double noise_sigma = 0.02;
  std::size_t rings = 64;
  std::size_t points_per_ring = 1100;
  double min_range = 2.0;
  double max_range = 70.0;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
  double ground_height(double r, double phi) const;
  double ring_radius(std::size_t ring) const;
};

struct SyntheticFrame {
  PointCloud cloud;
  std::vector<Label> truth;
};

/// Ring-pattern scan over the terrain. Ring radii grow geometrically from
/// min_range to max_range with a fixed point count per ring, so density
/// falls with range. Noise is Gaussian truncated at 5 sigma. Points whose
/// footprint falls inside a box are lifted onto its top and labelled
/// Obstacle. Each ring draws from its own seeded stream.
SyntheticFrame generate(const TerrainSpec& spec);

TerrainSpec parse_terrain_spec(std::string_view json_text);
TerrainSpec load_terrain_spec(const std::filesystem::path& path);

}  // namespace gpseg
