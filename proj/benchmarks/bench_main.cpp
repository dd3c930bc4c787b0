#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gpseg/gp.hpp"
#include "gpseg/opt.hpp"
#include "gpseg/pipeline.hpp"
#include "gpseg/synth.hpp"

namespace {

using namespace gpseg;

struct Problem {
  TrainingData data;
  Theta theta;
};

Problem make_problem(int n, int m) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Problem p;
  p.data.r = Eigen::VectorXd::LinSpaced(n, 2.0, 60.0);
  p.data.z.resize(n);
  for (int i = 0; i < n; ++i) p.data.z[i] = 0.1 * std::sin(p.data.r[i] / 7.0) + 0.02 * (u(rng) - 0.5);
  p.data.support_r = Eigen::VectorXd::LinSpaced(m, 2.0, 60.0);
  SupportSet support;
  for (int i = 0; i < m; ++i) {
    support.locations.push_back(p.data.support_r[i]);
    support.targets.push_back(std::log(3.0 + u(rng)));
  }
  p.theta = initial_theta(p.data, support);
  return p;
}

void BM_NsGram(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(n, 1.0, 60.0);
  const Eigen::VectorXd L = Eigen::VectorXd::LinSpaced(n, 1.0, 8.0);
  for (auto _ : state) benchmark::DoNotOptimize(ns_gram(r, L, 0.5));
}
BENCHMARK(BM_NsGram)->Arg(10)->Arg(30)->Arg(60);

void BM_Objective(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(objective(p.theta, p.data));
}
BENCHMARK(BM_Objective)->Arg(10)->Arg(30)->Arg(60);

void BM_ObjectiveAndGradient(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_gradient(p.theta, p.data));
}
BENCHMARK(BM_ObjectiveAndGradient)->Arg(10)->Arg(30)->Arg(60);

void BM_Training(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), 6);
  ScgOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(scg_minimize(p.data, p.theta, opts));
}
BENCHMARK(BM_Training)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SegmentFrame(benchmark::State& state) {
  TerrainSpec spec;
  spec.seed = 1;
  const auto frame = generate(spec);
  PipelineOptions options;
  options.grid.num_segments = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(segment_ground(frame.cloud, options));
  state.counters["points"] = static_cast<double>(frame.cloud.size());
}
BENCHMARK(BM_SegmentFrame)->Arg(1)->Arg(36)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
