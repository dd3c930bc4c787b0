#include "gpseg_cli/app.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gpseg/errors.hpp"
#include "gpseg/grid.hpp"
#include "gpseg/io.hpp"
#include "gpseg/lines.hpp"
#include "gpseg/pipeline.hpp"
#include "gpseg/synth.hpp"
#include "gpseg_cli/bench.hpp"
#include "gpseg_cli/config.hpp"
#include "gpseg_cli/gradcheck.hpp"
#include "gpseg_cli/suites.hpp"

namespace gpseg::cli {
namespace {

namespace fs = std::filesystem;

// Values given on the command line; unset ones leave the merged config alone.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::size_t> segments;
  std::optional<double> td;
  std::optional<double> tv;
  std::optional<double> r_min;
  std::optional<double> r_max;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Flat JSON config file")->check(CLI::ExistingFile);
    app.add_option("--segments", segments, "Number of angular segments");
    app.add_option("--td", td, "Distance threshold on |z - zbar| / sqrt(sigma_n^2 + V)");
    app.add_option("--tv", tv, "Variance threshold (m^2)");
    app.add_option("--rmin", r_min, "Minimum range (m)");
    app.add_option("--rmax", r_max, "Maximum range (m)");
    app.add_option("--jobs", jobs, "Worker threads over segments (0 = all cores)");
    app.add_option("--seed", seed, "Random seed");
  }

  // Defaults, then the file, then flags. Validated before any input is read.
  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) apply_config_file(config, config_path);
    if (segments) config.pipeline.grid.num_segments = *segments;
    if (td) config.pipeline.thresholds.distance = *td;
    if (tv) config.pipeline.thresholds.variance = *tv;
    if (r_min) config.pipeline.grid.r_min = *r_min;
    if (r_max) config.pipeline.grid.r_max = *r_max;
    if (jobs) config.pipeline.jobs = *jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : *jobs;
    if (seed) config.seed = *seed;
    config.validate();
    return config;
  }
};

bool first_line_is_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) return false;
  const auto comma = line.find(',');
  return !detail::parse_double(std::string_view(line).substr(0, comma));
}

PointCloud load_cloud(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, "input file not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pcd") return load_pcd(path);
  return load_csv(path, first_line_is_header(path));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void dump_lines(const fs::path& dir, const PointCloud& cloud, const PipelineOptions& options) {
  fs::create_directories(dir);
  const auto grid = build_grid(cloud, options.grid);
  for (const auto& segment : grid.segments) {
    const auto candidates = extract_candidates(segment);
    if (candidates.size() < 2) continue;
    std::ostringstream name;
    name << "segment_" << std::setw(3) << std::setfill('0') << segment.index << ".csv";
    write_lines_csv(dir / name.str(), candidates, extract_lines(candidates, options.lines));
  }
}

TerrainSpec resolve_spec(const std::string& spec_path, const std::string& preset, std::optional<std::uint64_t> seed) {
  TerrainSpec spec;
  if (!spec_path.empty() && !preset.empty()) {
    throw Error(ErrorCode::InvalidSpec, "give either a spec file or --preset, not both");
  }
  if (!spec_path.empty()) spec = load_terrain_spec(spec_path);
  if (!preset.empty()) spec = suite_spec(preset, spec.seed);
  if (seed) spec.seed = *seed;
  spec.validate();
  return spec;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground segmentation of LiDAR point clouds with segment-wise Gaussian processes", "gpseg"};
  app.require_subcommand(1);

  // segment
  auto* segment = app.add_subcommand("segment", "Label a point cloud as ground / obstacle");
  ConfigFlags segment_flags;
  segment_flags.attach(*segment);
  std::string segment_input;
  std::string segment_output;
  std::string segment_summary;
  std::string segment_lines_dir;
  bool segment_traces = false;
  segment->add_option("input", segment_input, "Input cloud (.pcd ASCII or .csv x,y,z)")->required();
  segment->add_option("-o,--output", segment_output, "Labelled CSV output")->required();
  segment->add_option("--summary", segment_summary, "Write the JSON summary here instead of stdout");
  segment->add_flag("--traces", segment_traces, "Include optimizer traces in the summary");
  segment->add_option("--dump-lines", segment_lines_dir, "Directory for per-segment line-fit CSVs");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic frame with ground truth");
  std::string synth_spec;
  std::string synth_preset;
  std::string synth_output;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("spec", synth_spec, "Terrain spec JSON");
  synth->add_option("--preset", synth_preset, "Named terrain: flat, sloped, piecewise, bumpy");
  synth->add_option("-o,--output", synth_output, "CSV output x,y,z,label")->required();
  synth->add_option("--seed", synth_seed, "Override the spec seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
  std::string eval_predicted;
  std::string eval_truth;
  std::optional<std::size_t> eval_segments;
  eval->add_option("predicted", eval_predicted, "CSV with a label column")->required();
  eval->add_option("truth", eval_truth, "CSV with x,y,z and a label column")->required();
  eval->add_option("--segments", eval_segments, "Add a per-segment breakdown with this many segments");

  // bench
  auto* bench = app.add_subcommand("bench", "Time segmentation on a synthetic frame");
  ConfigFlags bench_flags;
  bench_flags.attach(*bench);
  std::string bench_spec;
  std::string bench_preset;
  std::size_t bench_repetitions = 5;
  bench->add_option("spec", bench_spec, "Terrain spec JSON (default: flat preset)");
  bench->add_option("--preset", bench_preset, "Named terrain: flat, sloped, piecewise, bumpy");
  bench->add_option("-n,--repetitions", bench_repetitions, "Measured runs after one warm-up")
      ->check(CLI::PositiveNumber);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  GradcheckOptions gc;
  std::string gc_report;
  gradcheck->add_option("--seed", gc.seed, "Random seed");
  gradcheck->add_option("--trials", gc.trials, "Number of random segments");
  gradcheck->add_option("--max-candidates", gc.max_candidates, "Largest candidate count (>= 4)");
  gradcheck->add_option("--max-support", gc.max_support, "Largest support count (>= 1)");
  gradcheck->add_option("--step", gc.step, "Central-difference step");
  gradcheck->add_option("--report", gc_report, "Write the per-coordinate CSV here instead of stdout");
  gradcheck->add_flag("--corrupt-gradient", gc.corrupt, "Negative control: perturb the analytic gradient");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*segment) {
      const RunConfig config = segment_flags.resolve();
      const PointCloud cloud = load_cloud(segment_input);
      const auto result = segment_ground(cloud, config.pipeline);
      write_labeled(segment_output, result.labels, cloud);
      if (!segment_lines_dir.empty()) dump_lines(segment_lines_dir, cloud, config.pipeline);
      const std::string summary = to_json(result, segment_traces);
      if (segment_summary.empty()) {
        out << summary << '\n';
      } else {
        write_text(segment_summary, summary + '\n');
      }
      return kExitOk;
    }
    if (*synth) {
      const TerrainSpec spec = resolve_spec(synth_spec, synth_preset, synth_seed);
      const auto frame = generate(spec);
      write_cloud_csv(synth_output, frame.cloud, frame.truth);
      out << "wrote " << frame.cloud.size() << " points to " << synth_output << '\n';
      return kExitOk;
    }
    if (*eval) {
      const auto predicted_labels = read_label_column(eval_predicted);
      const auto truth = read_label_column(eval_truth);
      if (predicted_labels.size() != truth.size()) {
        throw Error(ErrorCode::LengthMismatch, "predicted has " + std::to_string(predicted_labels.size()) +
                                                   " rows, truth has " + std::to_string(truth.size()));
      }
      LabeledCloud predicted;
      predicted.verdicts.resize(predicted_labels.size());
      for (std::size_t i = 0; i < predicted_labels.size(); ++i) predicted.verdicts[i].label = predicted_labels[i];
      std::vector<std::size_t> segments;
      if (eval_segments) {
        GridConfig grid;
        grid.num_segments = *eval_segments;
        grid.validate();
        const PointCloud cloud = load_csv(eval_truth, true);
        if (cloud.size() != truth.size()) {
          throw Error(ErrorCode::LengthMismatch, "truth file has non-finite coordinates; cannot map segments");
        }
        segments = point_segments(cloud, grid);
      }
      out << to_json(evaluate(predicted, truth, segments)) << '\n';
      return kExitOk;
    }
    if (*bench) {
      const RunConfig config = bench_flags.resolve();
      const TerrainSpec spec =
          resolve_spec(bench_spec, bench_spec.empty() && bench_preset.empty() ? "flat" : bench_preset,
                       bench_flags.seed);
      const auto frame = generate(spec);
      const auto report = run_bench(frame.cloud, config.pipeline, bench_repetitions);
      out << std::fixed << std::setprecision(3);
      out << "frame: " << frame.cloud.size() << " points, " << config.pipeline.grid.num_segments
          << " segments, jobs " << config.pipeline.jobs << '\n';
      for (std::size_t k = 0; k < report.timings_ms.size(); ++k) {
        out << "run " << (k + 1) << ": " << report.timings_ms[k] << " ms\n";
      }
      out << "mean: " << report.mean_ms << " ms\n";
      out << "min: " << report.min_ms << " ms\n";
      out << "stages (mean ms, summed over segments): grid " << report.grid_ms << ", candidates "
          << report.stages.candidates_ms << ", lines " << report.stages.lines_ms << ", optimize "
          << report.stages.optimize_ms << ", predict " << report.stages.predict_ms << '\n';
      return kExitOk;
    }
    if (*gradcheck) {
      const auto report = run_gradcheck(gc);
      std::ostringstream summary;
      summary << "gradcheck: " << report.rows.size() << " coordinates over " << gc.trials
              << " segments, worst relative error " << std::scientific << std::setprecision(3) << report.worst
              << (report.passed ? " (pass)" : " (FAIL)") << '\n';
      if (gc_report.empty()) {
        write_gradcheck_csv(out, report);
        err << summary.str();
      } else {
        std::ostringstream csv;
        write_gradcheck_csv(csv, report);
        write_text(gc_report, csv.str());
        out << summary.str();
      }
      return report.passed ? kExitOk : kExitCheckFailed;
    }
  } catch (const ParseError& e) {
    err << "gpseg: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "gpseg: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "gpseg: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gpseg::cli
