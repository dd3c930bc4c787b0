#pragma once

#include <cstddef>
#include <vector>

#include "gpseg/io.hpp"

namespace gpseg {

struct GridConfig {
  std::size_t num_segments = 36;
  double r_min = 0.5;
  double r_max = 80.0;
  double bin_growth = 1.06;
  double first_bin_width = 1.0;
  std::size_t min_candidates_per_segment = 4;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Radial bin edges: edge[0] = r_min, widths grow geometrically, and the last
/// edge is pinned to r_max.
std::vector<double> bin_edges(const GridConfig& config);

struct PolarPoint {
  std::size_t source_index = 0;
  double r = 0.0;
  double z = 0.0;
  std::size_t segment = 0;
  std::size_t bin = 0;
};

/// All points of one angular segment, in source order.
struct SegmentData {
  std::size_t index = 0;
  std::size_t num_bins = 0;
  std::vector<PolarPoint> points;
};

struct GridMap {
  std::vector<SegmentData> segments;
  std::vector<double> edges;
  std::size_t excluded = 0;
};

/// The lowest point of a non-empty bin.
struct Candidate {
  double r = 0.0;
  double z = 0.0;
  std::size_t source_index = 0;
};

using GroundCandidates = std::vector<Candidate>;

/// Angular segment of a planar position; angle wrapped into [0, 2*pi).
std::size_t segment_of(double x, double y, std::size_t num_segments) noexcept;

GridMap build_grid(const PointCloud& cloud, const GridConfig& config);

/// One candidate per non-empty bin, sorted by r. Ties on z go to the smaller
/// r, then to the smaller source index.
GroundCandidates extract_candidates(const SegmentData& segment);

}  // namespace gpseg
