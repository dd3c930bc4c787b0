#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "gpseg/errors.hpp"
#include "gpseg/opt.hpp"
#include "gpseg/scg.hpp"

using namespace gpseg;

namespace {

double rosenbrock(const Eigen::VectorXd& x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

Eigen::VectorXd rosenbrock_grad(const Eigen::VectorXd& x) {
  Eigen::VectorXd g(2);
  g[0] = -400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]);
  g[1] = 200.0 * (x[1] - x[0] * x[0]);
  return g;
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("convex quadratic converges to the closed-form minimiser") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(5, 5);
  for (int i = 0; i < 25; ++i) M.data()[i] = g(rng);
  const Eigen::MatrixXd H = M * M.transpose() + Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) b[i] = g(rng);
  const Eigen::VectorXd x_star = H.ldlt().solve(b);

  ScgOptions opts;
  opts.gradient_tolerance = 1e-10;
  opts.relative_tolerance = 0.0;
  const auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(H * x) - b.dot(x); };
  const auto df = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return H * x - b; };
  const auto res = scg_minimize(f, df, Eigen::VectorXd::Zero(5), opts);
  CHECK(res.iterations <= 30);
  CHECK((res.x - x_star).cwiseAbs().maxCoeff() < 1e-8);
  // Below ~1e-8 the search direction itself underflows the squared-norm test.
  CHECK((res.stop == ScgStop::GradientTolerance || res.stop == ScgStop::ZeroDirection));
  CHECK(non_increasing(res.trace));

  // Termination contract at an ordinary tolerance.
  opts.gradient_tolerance = 1e-6;
  const auto loose = scg_minimize(f, df, Eigen::VectorXd::Zero(5), opts);
  CHECK(loose.stop == ScgStop::GradientTolerance);
  CHECK(loose.gradient.norm() < opts.gradient_tolerance);
  CHECK((loose.gradient - df(loose.x)).norm() == 0.0);
}

TEST_CASE("Rosenbrock from (-1.2, 1)") {
  ScgOptions opts;
  opts.max_iterations = 2000;
  opts.gradient_tolerance = 1e-9;
  opts.relative_tolerance = 0.0;
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto res = scg_minimize(rosenbrock, rosenbrock_grad, x0, opts);
  CHECK(res.value < 1e-6);
  CHECK(rosenbrock(res.x) == res.value);
  CHECK(non_increasing(res.trace));
}

TEST_CASE("non-finite objective values are rejected steps") {
  // Minimum at x = 2 but the function is undefined for x < 0.5.
  const auto f = [](const Eigen::VectorXd& x) {
    return x[0] < 0.5 ? std::numeric_limits<double>::infinity() : (x[0] - 2.0) * (x[0] - 2.0) + 1.0 / x[0];
  };
  const auto df = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, 2.0 * (x[0] - 2.0) - 1.0 / (x[0] * x[0]));
  };
  const auto res = scg_minimize(f, df, Eigen::VectorXd::Constant(1, 0.6), ScgOptions{});
  CHECK(std::isfinite(res.value));
  CHECK(res.x[0] >= 0.5);
  CHECK(non_increasing(res.trace));
}

TEST_CASE("non-finite start throws") {
  const auto f = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); };
  const auto df = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
  try {
    scg_minimize(f, df, Eigen::VectorXd::Zero(2), ScgOptions{});
    FAIL("expected NonFiniteStart");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteStart);
  }
}

TEST_CASE("identical inputs give identical traces") {
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto a = scg_minimize(rosenbrock, rosenbrock_grad, x0, ScgOptions{});
  const auto b = scg_minimize(rosenbrock, rosenbrock_grad, x0, ScgOptions{});
  CHECK(a.trace == b.trace);
  CHECK(a.x == b.x);
}

TEST_CASE("relative-change stop and option validation") {
  ScgOptions opts;
  opts.gradient_tolerance = 0.0;
  opts.relative_tolerance = 1e-3;
  const auto f = [](const Eigen::VectorXd& x) { return std::pow(x[0], 4) + 1.0; };
  const auto df = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, 4 * std::pow(x[0], 3)); };
  const auto res = scg_minimize(f, df, Eigen::VectorXd::Constant(1, 1.0), opts);
  CHECK(res.stop == ScgStop::RelativeChange);
  CHECK(res.iterations < opts.max_iterations);

  ScgOptions bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ScgOptions{};
  bad.gradient_tolerance = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("fd_gradient is exact on quadratics and second-order accurate") {
  Eigen::MatrixXd H(3, 3);
  H << 3, 1, 0, 1, 2, 0.5, 0, 0.5, 1;
  Eigen::VectorXd b(3);
  b << 1, -2, 0.5;
  const auto quad = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(H * x) - b.dot(x); };
  Eigen::VectorXd x(3);
  x << 0.3, -0.7, 1.1;
  const double h = 1e-3;
  const Eigen::VectorXd exact = H * x - b;
  const Eigen::VectorXd fd = fd_gradient(quad, x, h);
  CHECK((fd - exact).cwiseAbs().maxCoeff() < 1e3 * std::numeric_limits<double>::epsilon() / h);

  const auto smooth = [](const Eigen::VectorXd& v) { return std::sin(v[0]) * std::exp(v[1]) + v[2] * v[2] * v[2]; };
  Eigen::VectorXd g(3);
  g << std::cos(x[0]) * std::exp(x[1]), std::sin(x[0]) * std::exp(x[1]), 3 * x[2] * x[2];
  const double e1 = (fd_gradient(smooth, x, 1e-2) - g).cwiseAbs().maxCoeff();
  const double e2 = (fd_gradient(smooth, x, 5e-3) - g).cwiseAbs().maxCoeff();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}
