#include "gpseg/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpseg/errors.hpp"

namespace gpseg {

void ScgOptions::validate() const {
  // A zero tolerance switches that stopping rule off.
  if (max_iterations == 0 || !(gradient_tolerance >= 0.0) || !(relative_tolerance >= 0.0) ||
      !(initial_sigma > 0.0) || !(lambda_init > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "SCG needs max_iterations >= 1, tolerances >= 0, sigma and lambda > 0");
  }
}

ScgResult scg_minimize(const ScalarFunction& f, const GradientFunction& grad, const Eigen::VectorXd& x0,
                       const ScgOptions& options) {
  options.validate();
  constexpr double lambda_min = 1e-15;
  constexpr double lambda_max = 1e100;

  ScgResult res;
  res.x = x0;
  res.value = f(x0);
  ++res.evaluations;
  if (!std::isfinite(res.value)) throw Error(ErrorCode::NonFiniteStart, "objective is not finite at the start point");
  res.gradient = grad(x0);
  if (!res.gradient.allFinite()) throw Error(ErrorCode::NonFiniteStart, "gradient is not finite at the start point");
  res.trace.push_back(res.value);

  const auto n = static_cast<std::size_t>(x0.size());
  Eigen::VectorXd g = res.gradient;
  Eigen::VectorXd g_old = g;
  Eigen::VectorXd d = -g;
  double lambda = options.lambda_init;
  bool success = true;
  std::size_t successes = 0;
  double mu = 0.0;
  double kappa = 0.0;
  double curvature = 0.0;

  if (g.norm() < options.gradient_tolerance) {
    res.stop = ScgStop::GradientTolerance;
    return res;
  }

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    res.iterations = it + 1;
    if (success) {
      mu = d.dot(g);
      if (mu >= 0.0) {
        d = -g;
        mu = d.dot(g);
      }
      kappa = d.squaredNorm();
      if (kappa < std::numeric_limits<double>::epsilon()) {
        res.stop = ScgStop::ZeroDirection;
        return res;
      }
      const double sigma = options.initial_sigma / std::sqrt(kappa);
      const Eigen::VectorXd g_plus = grad(res.x + sigma * d);
      ++res.evaluations;
      curvature = d.dot(g_plus - g) / sigma;
      if (!std::isfinite(curvature)) curvature = 0.0;
    }

    double delta = curvature + lambda * kappa;
    if (delta <= 0.0) {
      delta = lambda * kappa;
      lambda -= curvature / kappa;
    }
    const double alpha = -mu / delta;
    const Eigen::VectorXd x_new = res.x + alpha * d;
    const double f_new = f(x_new);
    ++res.evaluations;

    // Comparison ratio: actual over predicted decrease.
    const double ratio = std::isfinite(f_new) ? 2.0 * (f_new - res.value) / (alpha * mu)
                                              : -std::numeric_limits<double>::infinity();
    if (ratio >= 0.0 && f_new <= res.value) {
      success = true;
      ++successes;
      const double f_old = res.value;
      res.x = x_new;
      res.value = f_new;
      res.trace.push_back(f_new);
      g_old = g;
      g = grad(res.x);
      ++res.evaluations;
      res.gradient = g;
      if (g.norm() < options.gradient_tolerance) {
        res.stop = ScgStop::GradientTolerance;
        return res;
      }
      if (std::abs(f_old - f_new) < options.relative_tolerance * std::max(1.0, std::abs(f_old))) {
        res.stop = ScgStop::RelativeChange;
        return res;
      }
    } else {
      success = false;
    }

    if (ratio < 0.25) lambda = std::min(4.0 * lambda, lambda_max);
    if (ratio > 0.75) lambda = std::max(0.5 * lambda, lambda_min);

    if (successes == n) {
      d = -g;
      successes = 0;
    } else if (success) {
      const double beta = (g_old - g).dot(g) / mu;
      d = beta * d - g;
    }
  }
  res.stop = ScgStop::MaxIterations;
  return res;
}

}  // namespace gpseg
