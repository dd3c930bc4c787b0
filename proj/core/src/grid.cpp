#include "gpseg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "gpseg/errors.hpp"

namespace gpseg {

void GridConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (num_segments < 1) fail("num_segments must be >= 1");
  if (!(r_min >= 0.0) || !std::isfinite(r_min)) fail("r_min must be >= 0");
  if (!(r_max > r_min) || !std::isfinite(r_max)) fail("r_max must exceed r_min");
  if (!(bin_growth >= 1.0) || !std::isfinite(bin_growth)) fail("bin_growth must be >= 1");
  if (!(first_bin_width > 0.0) || !std::isfinite(first_bin_width)) fail("first_bin_width must be > 0");
}

std::vector<double> bin_edges(const GridConfig& config) {
  config.validate();
  std::vector<double> edges{config.r_min};
  double width = config.first_bin_width;
  while (edges.back() + width < config.r_max) {
    edges.push_back(edges.back() + width);
    width *= config.bin_growth;
  }
  edges.push_back(config.r_max);
  return edges;
}

std::size_t segment_of(double x, double y, std::size_t num_segments) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double angle = std::atan2(y, x);
  if (angle < 0.0) angle += two_pi;
  const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(num_segments) * angle / two_pi));
  return std::min(m, num_segments - 1);
}

GridMap build_grid(const PointCloud& cloud, const GridConfig& config) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot grid an empty cloud");
  GridMap map;
  map.edges = bin_edges(config);
  const std::size_t num_bins = map.edges.size() - 1;
  map.segments.resize(config.num_segments);
  for (std::size_t m = 0; m < config.num_segments; ++m) {
    map.segments[m].index = m;
    map.segments[m].num_bins = num_bins;
  }

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    const double r = std::hypot(p.x, p.y);
    if (r < config.r_min || r > config.r_max) {
      ++map.excluded;
      continue;
    }
    // upper_bound over interior edges; r == r_max lands in the last bin.
    const auto it = std::upper_bound(map.edges.begin() + 1, map.edges.end() - 1, r);
    const auto bin = static_cast<std::size_t>(it - (map.edges.begin() + 1));
    const std::size_t m = segment_of(p.x, p.y, config.num_segments);
    map.segments[m].points.push_back(PolarPoint{i, r, p.z, m, bin});
  }
  return map;
}

GroundCandidates extract_candidates(const SegmentData& segment) {
  std::vector<std::optional<Candidate>> lowest(segment.num_bins);
  auto better = [](const PolarPoint& p, const Candidate& c) {
    if (p.z != c.z) return p.z < c.z;
    if (p.r != c.r) return p.r < c.r;
    return p.source_index < c.source_index;
  };
  for (const auto& p : segment.points) {
    auto& slot = lowest.at(p.bin);
    if (!slot || better(p, *slot)) slot = Candidate{p.r, p.z, p.source_index};
  }
  GroundCandidates out;
  for (const auto& c : lowest) {
    if (c) out.push_back(*c);
  }
  // Bins are disjoint radial intervals, so bin order is already r order.
  return out;
}

}  // namespace gpseg
