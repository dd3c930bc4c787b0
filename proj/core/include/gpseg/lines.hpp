#pragma once

#include <cstddef>
#include <filesystem>
#include <numbers>
#include <vector>

#include "gpseg/grid.hpp"

namespace gpseg {

struct LineParams {
  double fit_tolerance = 0.08;                          // m, rms residual
  double slope_tolerance = 0.25;                        // |dz/dr| change
  double gap_tolerance = 5.0;                           // m
  double angle_tolerance = 10.0 * std::numbers::pi / 180.0;  // rad
  double min_length_scale = 0.5;                        // m
  double max_length_scale = 50.0;                       // m

  void validate() const;
};

/// Least-squares line over candidates [start, end] (inclusive) in (r, z).
struct LineSegment {
  std::size_t start = 0;
  std::size_t end = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double mean_vector_angle = 0.0;
};

enum class CriticalReason { SlopeChange, ResidualJump, GapInRange };

struct CriticalPoint {
  std::size_t index = 0;
  CriticalReason reason = CriticalReason::SlopeChange;
};

struct LineExtraction {
  std::vector<LineSegment> lines;
  std::vector<CriticalPoint> critical_points;
};

/// Latent-process training data: locations and log length-scale targets.
struct SupportSet {
  std::vector<double> locations;
  std::vector<double> targets;
  std::vector<std::size_t> owner;  // index into the line list

  std::size_t size() const noexcept { return locations.size(); }
  bool empty() const noexcept { return locations.empty(); }
};

/// Incremental fit: a line closes at its last candidate when the next one lies
/// more than gap_tolerance away, bends the slope by more than slope_tolerance,
/// or pushes the rms residual above fit_tolerance. The closing candidate
/// starts the next line.
LineExtraction extract_lines(const GroundCandidates& candidates, const LineParams& params);

/// Angle of each candidate's vector from the line's first candidate, for
/// candidates start+1..end.
std::vector<double> vector_angles(const GroundCandidates& candidates, const LineSegment& line);

SupportSet select_pseudo_inputs(const GroundCandidates& candidates, const std::vector<LineSegment>& lines,
                                const LineParams& params);

/// Debug dump: one row per candidate with its line and critical-point flag.
void write_lines_csv(const std::filesystem::path& path, const GroundCandidates& candidates,
                     const LineExtraction& extraction);

}  // namespace gpseg
