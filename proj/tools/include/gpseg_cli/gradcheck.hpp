#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gpseg/opt.hpp"

namespace gpseg::cli {

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::size_t max_candidates = 15;
  std::size_t max_support = 6;
  double step = 1e-6;
  double tolerance = 1e-4;
  // Negative control: perturbs one analytic coordinate by 1% so the check must fail.
  bool corrupt = false;
};

struct GradcheckRow {
  std::size_t trial = 0;
  std::size_t coordinate = 0;
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  double worst = 0.0;
  bool passed = false;
};

/// A random segment with 4..max_candidates candidates on a gently curved
/// profile and 1..max_support support locations, plus a random theta.
struct RandomSegment {
  TrainingData data;
  Theta theta;
};
RandomSegment random_segment(std::mt19937_64& rng, std::size_t max_candidates, std::size_t max_support);

/// |a - f| / max(|a|, |f|, 1e-3): relative for ordinary magnitudes, absolute near zero.
double relative_error(double analytic, double numeric) noexcept;

std::string coordinate_name(std::size_t index);

GradcheckReport run_gradcheck(const GradcheckOptions& options);

void write_gradcheck_csv(std::ostream& out, const GradcheckReport& report);

}  // namespace gpseg::cli
