#include "gpseg_cli/bench.hpp"

#include <algorithm>
#include <numeric>

#include "gpseg/errors.hpp"

namespace gpseg::cli {

BenchReport run_bench(const PointCloud& cloud, const PipelineOptions& options, std::size_t repetitions) {
  if (repetitions == 0) throw Error(ErrorCode::PreconditionViolation, "repetitions must be >= 1");
  (void)segment_ground(cloud, options);

  BenchReport report;
  for (std::size_t k = 0; k < repetitions; ++k) {
    const auto result = segment_ground(cloud, options);
    report.timings_ms.push_back(result.total_ms);
    report.grid_ms += result.grid_ms;
    report.stages += result.stage_totals;
  }
  const double n = static_cast<double>(repetitions);
  report.mean_ms = std::accumulate(report.timings_ms.begin(), report.timings_ms.end(), 0.0) / n;
  report.min_ms = *std::min_element(report.timings_ms.begin(), report.timings_ms.end());
  report.grid_ms /= n;
  report.stages.candidates_ms /= n;
  report.stages.lines_ms /= n;
  report.stages.optimize_ms /= n;
  report.stages.predict_ms /= n;
  return report;
}

}  // namespace gpseg::cli
