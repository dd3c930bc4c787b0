#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpseg/grid.hpp"
#include "gpseg/io.hpp"
#include "gpseg/lines.hpp"
#include "gpseg/opt.hpp"
#include "gpseg/scg.hpp"

namespace gpseg {

struct ClassifierThresholds {
  double distance = 12.0;  // T_d, dimensionless
  double variance = 0.3;   // T_V, m^2

  void validate() const;
};

struct PipelineOptions {
  GridConfig grid;
  LineParams lines;
  ClassifierThresholds thresholds;
  ScgOptions scg;
  std::size_t jobs = 1;  // worker threads over segments

  void validate() const;
};

enum class SegmentStatus { Trained, Empty, TooFewCandidates, NumericalFailure };

std::string_view to_string(SegmentStatus status) noexcept;

struct StageTimes {
  double candidates_ms = 0.0;
  double lines_ms = 0.0;
  double optimize_ms = 0.0;
  double predict_ms = 0.0;

  StageTimes& operator+=(const StageTimes& other) noexcept;
};

struct SegmentDiagnostics {
  std::size_t segment = 0;
  SegmentStatus status = SegmentStatus::Empty;
  std::string failure;
  std::size_t points = 0;
  std::size_t candidates = 0;
  std::size_t lines = 0;
  std::size_t critical_points = 0;
  std::size_t support = 0;
  Theta theta;
  double objective = 0.0;
  std::vector<double> trace;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
  StageTimes stages;
};

struct SegmentationResult {
  LabeledCloud labels;
  std::vector<SegmentDiagnostics> segments;
  std::size_t excluded = 0;
  double grid_ms = 0.0;
  double total_ms = 0.0;
  StageTimes stage_totals;  // summed over segments
};

struct Classification {
  Label label = Label::Obstacle;
  double d_stat = 0.0;
};

/// Ground iff |z* - zbar| / sqrt(sigma_n^2 + V) <= T_d and V <= T_V.
Classification classify_point(double z_star, const Posterior& posterior, double sigma_n,
                              const ClassifierThresholds& thresholds);

/// Full per-frame flow. Segments train independently; a numerical failure
/// in one segment leaves its points Unassigned instead of aborting.
SegmentationResult segment_ground(const PointCloud& cloud, const PipelineOptions& options);

/// Segment index of every point under `config` (points outside the radial
/// range still get their angular segment).
std::vector<std::size_t> point_segments(const PointCloud& cloud, const GridConfig& config);

struct SegmentMetrics {
  std::size_t segment = 0;
  std::size_t assigned = 0;
  std::size_t correct = 0;
  std::optional<double> success_rate;
};

/// Rates are nullopt when nothing was assigned.
struct Metrics {
  std::size_t total = 0;
  std::size_t assigned = 0;
  std::size_t unassigned = 0;
  std::optional<double> success_rate;
  std::optional<double> ground_precision;
  std::optional<double> ground_recall;
  std::vector<SegmentMetrics> per_segment;
};

/// Unassigned predictions are excluded from every rate. `segments`, when
/// given, must be parallel to `truth` and enables the per-segment breakdown.
Metrics evaluate(const LabeledCloud& predicted, std::span<const Label> truth,
                 std::span<const std::size_t> segments = {});

std::string to_json(const SegmentationResult& result, bool include_traces = false);
std::string to_json(const Metrics& metrics);

}  // namespace gpseg
