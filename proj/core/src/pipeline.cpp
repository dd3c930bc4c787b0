#include "gpseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct SegmentOutput {
  SegmentDiagnostics diagnostics;
  std::vector<std::pair<std::size_t, PointVerdict>> verdicts;
};

SegmentOutput process_segment(const SegmentData& segment, const PipelineOptions& options) {
  const auto start = Clock::now();
  SegmentOutput out;
  auto& diag = out.diagnostics;
  diag.segment = segment.index;
  diag.points = segment.points.size();
  if (segment.points.empty()) return out;

  auto t = Clock::now();
  const GroundCandidates candidates = extract_candidates(segment);
  diag.candidates = candidates.size();
  diag.stages.candidates_ms = elapsed_ms(t);
  if (candidates.size() < options.grid.min_candidates_per_segment) {
    diag.status = SegmentStatus::TooFewCandidates;
    diag.wall_ms = elapsed_ms(start);
    return out;
  }

  try {
    t = Clock::now();
    const LineExtraction extraction = extract_lines(candidates, options.lines);
    const SupportSet support = select_pseudo_inputs(candidates, extraction.lines, options.lines);
    diag.lines = extraction.lines.size();
    diag.critical_points = extraction.critical_points.size();
    diag.support = support.size();
    diag.stages.lines_ms = elapsed_ms(t);

    t = Clock::now();
    const LengthScaleBounds bounds{options.lines.min_length_scale, options.lines.max_length_scale};
    const TrainingData data = make_training_data(candidates, support, bounds);
    const TrainingResult trained = scg_minimize(data, initial_theta(data, support), options.scg);
    diag.theta = trained.theta;
    diag.objective = trained.value;
    diag.trace = trained.trace;
    diag.iterations = trained.iterations;
    diag.stages.optimize_ms = elapsed_ms(t);

    t = Clock::now();
    const GroundModel model = build_ground_model(trained.theta, data);
    const auto q = static_cast<Eigen::Index>(segment.points.size());
    Eigen::VectorXd query_r(q);
    for (Eigen::Index i = 0; i < q; ++i) query_r[i] = segment.points[static_cast<std::size_t>(i)].r;
    const Eigen::VectorXd query_L = model.length_scales_at(query_r);
    const std::vector<Posterior> posts = height_posterior(model, query_r, query_L);
    const double sigma_n = model.height.sigma_n;
    out.verdicts.reserve(segment.points.size());
    for (std::size_t i = 0; i < segment.points.size(); ++i) {
      const auto& p = segment.points[i];
      const Classification c = classify_point(p.z, posts[i], sigma_n, options.thresholds);
      out.verdicts.emplace_back(p.source_index, PointVerdict{c.label, posts[i].mean, posts[i].variance, c.d_stat});
    }
    diag.stages.predict_ms = elapsed_ms(t);
    diag.status = SegmentStatus::Trained;
  } catch (const Error& err) {
    out.verdicts.clear();
    diag.status = SegmentStatus::NumericalFailure;
    diag.failure = err.what();
  }
  diag.wall_ms = elapsed_ms(start);
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json stages_json(const StageTimes& s) {
  return {{"candidates_ms", s.candidates_ms},
          {"lines_ms", s.lines_ms},
          {"optimize_ms", s.optimize_ms},
          {"predict_ms", s.predict_ms}};
}

}  // namespace

void ClassifierThresholds::validate() const {
  if (!(distance > 0.0) || !(variance > 0.0) || !std::isfinite(distance) || !std::isfinite(variance)) {
    throw Error(ErrorCode::InvalidConfig, "classifier thresholds must be positive");
  }
}

void PipelineOptions::validate() const {
  grid.validate();
  lines.validate();
  thresholds.validate();
  scg.validate();
  if (jobs == 0) throw Error(ErrorCode::InvalidConfig, "jobs must be >= 1");
}

std::string_view to_string(SegmentStatus status) noexcept {
  switch (status) {
    case SegmentStatus::Trained: return "trained";
    case SegmentStatus::Empty: return "empty";
    case SegmentStatus::TooFewCandidates: return "too_few_candidates";
    case SegmentStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

StageTimes& StageTimes::operator+=(const StageTimes& other) noexcept {
  candidates_ms += other.candidates_ms;
  lines_ms += other.lines_ms;
  optimize_ms += other.optimize_ms;
  predict_ms += other.predict_ms;
  return *this;
}

Classification classify_point(double z_star, const Posterior& posterior, double sigma_n,
                              const ClassifierThresholds& thresholds) {
  const double d = std::abs(z_star - posterior.mean) / std::sqrt(sigma_n * sigma_n + posterior.variance);
  const bool ground = d <= thresholds.distance && posterior.variance <= thresholds.variance;
  return {ground ? Label::Ground : Label::Obstacle, d};
}

SegmentationResult segment_ground(const PointCloud& cloud, const PipelineOptions& options) {
  options.validate();
  const auto start = Clock::now();
  SegmentationResult result;

  auto t = Clock::now();
  const GridMap grid = build_grid(cloud, options.grid);
  result.excluded = grid.excluded;
  result.grid_ms = elapsed_ms(t);

  std::vector<SegmentOutput> outputs(grid.segments.size());
  const std::size_t workers = std::min(options.jobs, grid.segments.size());
  if (workers <= 1) {
    for (std::size_t m = 0; m < grid.segments.size(); ++m) outputs[m] = process_segment(grid.segments[m], options);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t m = next++; m < grid.segments.size(); m = next++) {
          try {
            outputs[m] = process_segment(grid.segments[m], options);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  result.labels.verdicts.assign(cloud.size(), PointVerdict{Label::Unassigned, std::nan(""), std::nan(""), std::nan("")});
  result.segments.reserve(outputs.size());
  for (auto& out : outputs) {
    for (const auto& [index, verdict] : out.verdicts) result.labels.verdicts[index] = verdict;
    result.stage_totals += out.diagnostics.stages;
    result.segments.push_back(std::move(out.diagnostics));
  }
  result.total_ms = elapsed_ms(start);
  return result;
}

std::vector<std::size_t> point_segments(const PointCloud& cloud, const GridConfig& config) {
  std::vector<std::size_t> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points) out.push_back(segment_of(p.x, p.y, config.num_segments));
  return out;
}

Metrics evaluate(const LabeledCloud& predicted, std::span<const Label> truth, std::span<const std::size_t> segments) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "predicted has " + std::to_string(predicted.size()) +
                                               " labels, truth has " + std::to_string(truth.size()));
  }
  if (!segments.empty() && segments.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "segment index list does not match truth length");
  }
  Metrics m;
  m.total = truth.size();
  std::size_t correct = 0;
  std::size_t true_ground = 0;
  std::size_t predicted_ground = 0;
  std::size_t both_ground = 0;
  std::vector<SegmentMetrics> per;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Label p = predicted.verdicts[i].label;
    if (p == Label::Unassigned) {
      ++m.unassigned;
      continue;
    }
    ++m.assigned;
    const bool hit = p == truth[i];
    correct += hit ? 1 : 0;
    true_ground += truth[i] == Label::Ground ? 1 : 0;
    predicted_ground += p == Label::Ground ? 1 : 0;
    both_ground += (p == Label::Ground && truth[i] == Label::Ground) ? 1 : 0;
    if (!segments.empty()) {
      const std::size_t s = segments[i];
      if (per.size() <= s) per.resize(s + 1);
      per[s].assigned += 1;
      per[s].correct += hit ? 1 : 0;
    }
  }
  m.success_rate = ratio(correct, m.assigned);
  m.ground_precision = ratio(both_ground, predicted_ground);
  m.ground_recall = ratio(both_ground, true_ground);
  for (std::size_t s = 0; s < per.size(); ++s) {
    per[s].segment = s;
    per[s].success_rate = ratio(per[s].correct, per[s].assigned);
  }
  m.per_segment = std::move(per);
  return m;
}

std::string to_json(const SegmentationResult& result, bool include_traces) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : result.segments) {
    nlohmann::json j = {{"segment", s.segment},
                        {"status", std::string(to_string(s.status))},
                        {"points", s.points},
                        {"candidates", s.candidates},
                        {"lines", s.lines},
                        {"critical_points", s.critical_points},
                        {"support", s.support},
                        {"trace_length", s.trace.size()},
                        {"iterations", s.iterations},
                        {"wall_ms", s.wall_ms},
                        {"stages", stages_json(s.stages)}};
    if (s.status == SegmentStatus::Trained) {
      const auto h = s.theta.height();
      const auto l = s.theta.latent();
      j["objective"] = s.objective;
      j["theta"] = {{"sigma_f", h.sigma_f},
                    {"sigma_n", h.sigma_n},
                    {"sigma_f_bar", l.sigma_f_bar},
                    {"sigma_l_bar", l.sigma_l_bar},
                    {"sigma_n_bar", l.sigma_n_bar},
                    {"l_bar", std::vector<double>(s.theta.l_bar.data(), s.theta.l_bar.data() + s.theta.l_bar.size())}};
    }
    if (!s.failure.empty()) j["failure"] = s.failure;
    if (include_traces) j["trace"] = s.trace;
    segments.push_back(std::move(j));
  }
  const nlohmann::json root = {{"points", result.labels.size()},
                               {"excluded", result.excluded},
                               {"grid_ms", result.grid_ms},
                               {"total_ms", result.total_ms},
                               {"stages", stages_json(result.stage_totals)},
                               {"segments", std::move(segments)}};
  return root.dump(2);
}

std::string to_json(const Metrics& metrics) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : metrics.per_segment) {
    per.push_back({{"segment", s.segment},
                   {"assigned", s.assigned},
                   {"correct", s.correct},
                   {"success_rate", optional_json(s.success_rate)}});
  }
  const nlohmann::json root = {{"total", metrics.total},
                               {"assigned", metrics.assigned},
                               {"unassigned", metrics.unassigned},
                               {"success_rate", optional_json(metrics.success_rate)},
                               {"ground_precision", optional_json(metrics.ground_precision)},
                               {"ground_recall", optional_json(metrics.ground_recall)},
                               {"per_segment", std::move(per)}};
  return root.dump(2);
}

}  // namespace gpseg
