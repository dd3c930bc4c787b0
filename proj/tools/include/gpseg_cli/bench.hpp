#pragma once

#include <cstddef>
#include <vector>

#include "gpseg/pipeline.hpp"

namespace gpseg::cli {

struct BenchReport {
  std::vector<double> timings_ms;  // one per measured repetition
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double grid_ms = 0.0;  // per-stage values are means over repetitions
  StageTimes stages;     // summed over segments, so CPU time rather than wall time when jobs > 1
};

/// Runs segment_ground once to warm caches and allocators, then `repetitions`
/// measured times.
BenchReport run_bench(const PointCloud& cloud, const PipelineOptions& options, std::size_t repetitions);

}  // namespace gpseg::cli
