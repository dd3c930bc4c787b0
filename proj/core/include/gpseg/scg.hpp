#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace gpseg {

struct ScgOptions {
  std::size_t max_iterations = 100;
  double gradient_tolerance = 1e-5;
  double initial_sigma = 1e-4;
  double lambda_init = 1e-6;
  double relative_tolerance = 1e-9;

  void validate() const;
};

enum class ScgStop { GradientTolerance, RelativeChange, MaxIterations, ZeroDirection };

struct ScgResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::vector<double> trace;  // objective at the start and after every accepted step
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  ScgStop stop = ScgStop::MaxIterations;
};

/// Objective callback. Must return +inf (or NaN) for points outside the
/// domain; the optimizer treats those as rejected steps.
using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
/// Gradient callback, only called at points with a finite objective or at
/// tiny offsets from one.
using GradientFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Moller's scaled conjugate gradient. No line search: step length comes from
/// a finite-difference Hessian-vector estimate along the search direction,
/// regularised by a Levenberg-Marquardt style lambda. Throws NonFiniteStart
/// when f(x0) or its gradient is not finite.
ScgResult scg_minimize(const ScalarFunction& f, const GradientFunction& grad, const Eigen::VectorXd& x0,
                       const ScgOptions& options);

}  // namespace gpseg
