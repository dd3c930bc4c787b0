#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gpseg/errors.hpp"
#include "gpseg/gp.hpp"

using namespace gpseg;

namespace {

// Length-scales from a latent process that sits near log(L) over [0, 60]: a
// fixed support grid at a constant target, so every model built from the
// same L sees the same length-scale at a given r.
GroundModel model_with_constant_L(const Eigen::VectorXd& r, const Eigen::VectorXd& z, double L,
                                  const HeightKernelParams& height) {
  const Eigen::Index m = 12;
  Eigen::VectorXd sr = Eigen::VectorXd::LinSpaced(m, 0.0, 60.0);
  Eigen::VectorXd sl = Eigen::VectorXd::Constant(m, std::log(L));
  LatentKernelParams latent{1.0, 6.0, 1e-2};
  return train_ground_model(r, z, 0.0, sr, sl, height, latent, LengthScaleBounds{});
}

struct Dense {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

// Explicit inverse, entry-by-entry kernel: independent of the library's Cholesky path.
Dense dense_oracle(const GroundModel& m, const Eigen::VectorXd& q, const Eigen::VectorXd& qL) {
  const Eigen::Index n = m.r.size();
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = ns_kernel(m.r[i], m.r[j], m.length_scales[i], m.length_scales[j], m.height.sigma_f);
    }
  }
  A.diagonal().array() += m.height.sigma_n * m.height.sigma_n + m.a_factor.jitter();
  const Eigen::MatrixXd Ainv = A.inverse();
  Dense out{Eigen::VectorXd(q.size()), Eigen::VectorXd(q.size())};
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks[i] = ns_kernel(q[k], m.r[i], qL[k], m.length_scales[i], m.height.sigma_f);
    out.mean[k] = ks.dot(Ainv * m.z) + m.height_offset;
    out.variance[k] = ns_kernel(q[k], q[k], qL[k], qL[k], m.height.sigma_f) - ks.dot(Ainv * ks);
  }
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

}  // namespace

TEST_CASE("ns_kernel reduces to the SE kernel for equal length-scales") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(0.0, 80.0);
  std::uniform_real_distribution<double> len(0.5, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = pos(rng), b = pos(rng), L = len(rng);
    const double se = 1.7 * 1.7 * std::exp(-(a - b) * (a - b) / (2.0 * L * L));
    CHECK(std::abs(ns_kernel(a, b, L, L, 1.7) - se) < 1e-12);
  }
}

TEST_CASE("ns_kernel prefactor by hand") {
  CHECK(ns_kernel(3.0, 3.0, 1.0, 2.0, 1.0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(2.0 / std::sqrt(5.0) == doctest::Approx(0.894427).epsilon(1e-6));
}

TEST_CASE("ns_kernel decays monotonically with distance and is symmetric") {
  double prev = ns_kernel(0.0, 0.0, 2.0, 3.0, 1.0);
  for (double d = 0.5; d < 40.0; d += 0.5) {
    const double k = ns_kernel(0.0, d, 2.0, 3.0, 1.0);
    CHECK(k < prev);
    prev = k;
  }
  CHECK(prev < 1e-40);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (int k = 0; k < 200; ++k) {
    const double ri = u(rng), rj = u(rng), Li = u(rng), Lj = u(rng);
    CHECK(ns_kernel(ri, rj, Li, Lj, 0.7) == ns_kernel(rj, ri, Lj, Li, 0.7));
  }
}

TEST_CASE("ns_kernel rejects non-positive inputs") {
  CHECK_THROWS_AS(ns_kernel(0, 1, 0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ns_kernel(0, 1, 1.0, -1.0, 1.0), Error);
  CHECK_THROWS_AS(ns_kernel(0, 1, 1.0, 1.0, 0.0), Error);
}

TEST_CASE("se_kernel values") {
  const LatentKernelParams p{1.3, 2.0, 0.1};
  CHECK(se_kernel(4.0, 4.0, p) == doctest::Approx(1.69));
  CHECK(se_kernel(0.0, 2.0, LatentKernelParams{1.0, 2.0, 0.1}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(std::exp(-0.5) == doctest::Approx(0.606531).epsilon(1e-6));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(se_kernel(a, b, p) == se_kernel(b, a, p));
  }
  CHECK_THROWS_AS(se_kernel(0, 1, LatentKernelParams{1.0, 0.0, 0.1}), Error);
}

TEST_CASE("Gram builders match the scalar kernels") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(0, 60), len(0.5, 50);
  Eigen::VectorXd r(7), L(7), q(3), qL(3);
  for (int i = 0; i < 7; ++i) r[i] = pos(rng), L[i] = len(rng);
  for (int i = 0; i < 3; ++i) q[i] = pos(rng), qL[i] = len(rng);
  const auto K = ns_gram(r, L, 0.9);
  const auto C = ns_cross(q, qL, r, L, 0.9);
  const auto Ct = ns_cross(r, L, q, qL, 0.9);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) CHECK(K(i, j) == doctest::Approx(ns_kernel(r[i], r[j], L[i], L[j], 0.9)).epsilon(1e-13));
    for (int k = 0; k < 3; ++k) {
      CHECK(C(k, i) == doctest::Approx(ns_kernel(q[k], r[i], qL[k], L[i], 0.9)).epsilon(1e-13));
      CHECK(Ct(i, k) == doctest::Approx(C(k, i)).epsilon(1e-13));
    }
  }
  const LatentKernelParams p{0.8, 4.0, 0.1};
  const auto S = se_cross(r, q, p);
  for (int i = 0; i < 7; ++i)
    for (int k = 0; k < 3; ++k) CHECK(S(i, k) == doctest::Approx(se_kernel(r[i], q[k], p)).epsilon(1e-13));
}

TEST_CASE("constant-L Gram equals the SE Gram to 1e-12") {
  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(25, 1.0, 70.0);
  const auto K = ns_gram(r, Eigen::VectorXd::Constant(25, 6.0), 1.0);
  const auto S = se_cross(r, r, LatentKernelParams{1.0, 6.0, 0.1});
  CHECK((K - S).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Cholesky with jitter succeeds on random non-stationary Gram matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.5, 80.0), len(0.5, 50.0);
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd r(12), L(12);
    for (int i = 0; i < 12; ++i) r[i] = pos(rng), L[i] = len(rng);
    Eigen::MatrixXd A = ns_gram(r, L, 1.0);
    A.diagonal().array() += 1e-4;
    JitteredCholesky f(A);
    CHECK(f.jitter() <= 1e-6);
  }
}

TEST_CASE("jitter ladder escalates and then fails") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);  // rank one, needs jitter
  JitteredCholesky f(ones);
  CHECK(f.jitter() > 0.0);
  CHECK(f.jitter() <= 1e-6);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  try {
    JitteredCholesky g(neg);
    FAIL("expected SingularMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
  Eigen::MatrixXd spd(2, 2);
  spd << 4, 1, 1, 3;
  JitteredCholesky h(spd);
  CHECK(h.jitter() == 0.0);
  CHECK(h.log_determinant() == doctest::Approx(std::log(11.0)));
  CHECK((h.inverse() - spd.inverse()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Cholesky inverse agrees with a dense LU inverse") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (const int n : {1, 3, 17, 40}) {
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) m(i, j) = g(rng);
    const Eigen::MatrixXd spd = m * m.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd got = JitteredCholesky(spd).inverse();
    const Eigen::MatrixXd want = spd.partialPivLu().inverse();
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12 * want.cwiseAbs().maxCoeff());
    CHECK((got - got.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("latent posterior interpolates, reverts to zero and matches a dense solve") {
  SupportSet s;
  s.locations = {2.0, 5.0, 9.0};
  s.targets = {1.0, 2.5, 0.3};
  const LatentKernelParams quiet{1.0, 2.0, 1e-6};
  const std::vector<double> at_support{2.0, 5.0, 9.0};
  const auto interp = latent_predict(s, at_support, quiet);
  for (std::size_t i = 0; i < 3; ++i) CHECK(interp[i] == doctest::Approx(s.targets[i]).epsilon(1e-6));

  const std::vector<double> far{500.0};
  CHECK(std::abs(latent_predict(s, far, quiet)[0]) < 1e-12);

  // Two support points at the same target: compare with an explicit solve.
  SupportSet two;
  two.locations = {3.0, 7.0};
  two.targets = {1.2, 1.2};
  const LatentKernelParams p{1.1, 2.5, 0.2};
  Eigen::Matrix2d B;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) B(i, j) = se_kernel(two.locations[i], two.locations[j], p);
  B.diagonal().array() += p.sigma_n_bar * p.sigma_n_bar;
  const Eigen::Vector2d w = B.inverse() * Eigen::Vector2d(1.2, 1.2);
  for (double q = 3.0; q <= 7.0; q += 0.5) {
    const double expect = se_kernel(q, 3.0, p) * w[0] + se_kernel(q, 7.0, p) * w[1];
    const std::vector<double> qs{q};
    const double got = latent_predict(two, qs, p)[0];
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    CHECK(got >= 0.0);
  }
}

TEST_CASE("height posterior interpolates training data with tiny noise") {
  Eigen::VectorXd r(6), z(6);
  r << 2, 4, 7, 11, 16, 22;
  z << 0.1, -0.05, 0.2, 0.0, 0.15, -0.1;
  const auto m = model_with_constant_L(r, z, 4.0, HeightKernelParams{0.5, 1e-6});
  const auto post = height_posterior(m, r, m.length_scales);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    CHECK(std::abs(post[static_cast<std::size_t>(i)].mean - z[i]) < 1e-6);
    CHECK(post[static_cast<std::size_t>(i)].variance <= 1e-6);
  }
}

TEST_CASE("height posterior matches the dense-inverse oracle") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(1.0, 40.0), h(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd r(5), z(5), q(3);
    for (int i = 0; i < 5; ++i) r[i] = pos(rng), z[i] = h(rng);
    std::sort(r.data(), r.data() + 5);
    for (int i = 0; i < 3; ++i) q[i] = pos(rng);
    const auto m = train_ground_model(r, z, 0.4, Eigen::Vector2d(5.0, 25.0), Eigen::Vector2d(1.0, 2.0),
                                      HeightKernelParams{0.3, 0.05}, LatentKernelParams{1.0, 8.0, 0.1},
                                      LengthScaleBounds{});
    const Eigen::VectorXd qL = m.length_scales_at(q);
    const auto got = height_posterior(m, q, qL);
    const auto want = dense_oracle(m, q, qL);
    for (int k = 0; k < 3; ++k) {
      CHECK(rel(got[static_cast<std::size_t>(k)].mean, want.mean[k]) < 1e-8);
      CHECK(rel(got[static_cast<std::size_t>(k)].variance, want.variance[k]) < 1e-8);
    }
  }
}

TEST_CASE("posterior variance bounds and monotone information") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(1.0, 40.0), h(-0.3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd r(6), z(6), q(4);
    for (int i = 0; i < 6; ++i) r[i] = pos(rng), z[i] = h(rng);
    for (int i = 0; i < 4; ++i) q[i] = pos(rng);
    const HeightKernelParams hp{0.4, 0.05};
    const auto full = model_with_constant_L(r, z, 3.0, hp);
    const auto fewer = model_with_constant_L(r.head(5), z.head(5), 3.0, hp);
    const Eigen::VectorXd qL = Eigen::VectorXd::Constant(4, 3.0);
    const auto pf = height_posterior(full, q, qL);
    const auto pl = height_posterior(fewer, q, qL);
    for (int k = 0; k < 4; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      CHECK(pf[ku].variance >= 0.0);
      CHECK(pf[ku].variance <= ns_kernel(q[k], q[k], qL[k], qL[k], hp.sigma_f) + 1e-12);
      CHECK(pf[ku].variance <= pl[ku].variance + 1e-12);
    }
  }
}

TEST_CASE("length-scale bounds clamp") {
  const LengthScaleBounds b;
  CHECK(b.clamp(0.1) == 0.5);
  CHECK(b.clamp(80.0) == 50.0);
  CHECK(b.clamp(7.0) == 7.0);
}
