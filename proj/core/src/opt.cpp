#include "gpseg/opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2), values.end());
  const double upper = values[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lower + upper);
}

// Intermediate quantities shared by the objective and its gradient.
struct Evaluation {
  HeightKernelParams height;
  LatentKernelParams latent;
  Eigen::ArrayXXd arg_bar;  // -(a-b)^2 / (2 sigma_l^2) over support x support
  Eigen::MatrixXd k_bar;    // latent Gram at support, no noise
  JitteredCholesky b;
  Eigen::VectorXd beta;     // B^{-1} l_bar
  Eigen::ArrayXXd arg_q;    // as arg_bar, training x support
  Eigen::MatrixXd k_q;      // latent cross covariance
  Eigen::VectorXd log_l;    // latent mean at training
  Eigen::VectorXd L;        // clamped length-scales
  Eigen::ArrayXXd arg;      // -(ri-rj)^2 / s
  Eigen::ArrayXXd inv_s;    // 1 / (Li^2 + Lj^2)
  Eigen::MatrixXd K;        // height Gram, no noise
  JitteredCholesky a;
  Eigen::VectorXd alpha;    // A^{-1} z
  double value = 0.0;
};

void se_terms(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const LatentKernelParams& p, Eigen::ArrayXXd& arg,
              Eigen::MatrixXd& k) {
  const double inv = -0.5 / (p.sigma_l_bar * p.sigma_l_bar);
  arg.resize(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[j];
      arg(i, j) = d * d * inv;
    }
  }
  k = ((p.sigma_f_bar * p.sigma_f_bar) * arg.exp()).matrix();
}

Evaluation evaluate(const Theta& theta, const TrainingData& data) {
  if (!theta.in_domain()) throw Error(ErrorCode::NonFinite, "theta outside the admissible domain");
  if (data.size() == 0 || data.support_size() == 0) {
    throw Error(ErrorCode::PreconditionViolation, "objective needs training and support points");
  }
  if (theta.l_bar.size() != data.support_r.size()) {
    throw Error(ErrorCode::PreconditionViolation, "l_bar size does not match the support set");
  }
  Evaluation e;
  e.height = theta.height();
  e.latent = theta.latent();

  se_terms(data.support_r, data.support_r, e.latent, e.arg_bar, e.k_bar);
  Eigen::MatrixXd B = e.k_bar;
  B.diagonal().array() += e.latent.sigma_n_bar * e.latent.sigma_n_bar;
  e.b = JitteredCholesky(B);
  e.beta = e.b.solve(theta.l_bar);

  // Support locations are usually the candidates themselves.
  if (data.r.size() == data.support_r.size() && data.r == data.support_r) {
    e.arg_q = e.arg_bar;
    e.k_q = e.k_bar;
  } else {
    se_terms(data.r, data.support_r, e.latent, e.arg_q, e.k_q);
  }
  e.log_l = e.k_q * e.beta;
  e.L = e.log_l.array().exp().cwiseMax(data.bounds.min).cwiseMin(data.bounds.max).matrix();

  // Same algebra as ns_gram, keeping the pieces the gradient reuses.
  const Eigen::Index n = data.r.size();
  e.arg.resize(n, n);
  e.inv_s.resize(n, n);
  Eigen::ArrayXXd pref(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double inv_s = 1.0 / (e.L[i] * e.L[i] + e.L[j] * e.L[j]);
      const double d = data.r[i] - data.r[j];
      e.inv_s(i, j) = inv_s;
      e.arg(i, j) = -d * d * inv_s;
      pref(i, j) = 2.0 * e.L[i] * e.L[j] * inv_s;
    }
  }
  const double sf2 = e.height.sigma_f * e.height.sigma_f;
  e.K = (sf2 * pref.sqrt() * e.arg.exp()).matrix();
  e.K.diagonal().setConstant(sf2);
  Eigen::MatrixXd A = e.K;
  A.diagonal().array() += e.height.sigma_n * e.height.sigma_n;
  e.a = JitteredCholesky(A);
  e.alpha = e.a.solve(data.z);

  const auto count = static_cast<double>(data.size() + data.support_size());
  e.value = 0.5 * (data.z.dot(e.alpha) + e.a.log_determinant() + theta.l_bar.dot(e.beta) + e.b.log_determinant() +
                   count * kLog2Pi);
  if (!std::isfinite(e.value)) throw Error(ErrorCode::NonFinite, "objective evaluated to a non-finite value");
  return e;
}

Eigen::VectorXd gradient_from(const Evaluation& e, const Theta& theta, const TrainingData& data) {
  // Height process: d/d* of 0.5[z'A^{-1}z + log|A|] = 0.5 tr(W dA/d*), W = A^{-1} - alpha alpha'.
  const Eigen::MatrixXd W = e.a.inverse() - e.alpha * e.alpha.transpose();
  const double sn2 = e.height.sigma_n * e.height.sigma_n;
  const Eigen::ArrayXXd WK = W.array() * e.K.array();
  const double g_sigma_f = WK.sum();
  const double g_sigma_n = sn2 * W.trace();

  // L_i dK_ij/dL_i = K_ij (1/2 - L_i^2 (1 - 2 (ri-rj)^2/s) / s); vanishes on the diagonal.
  // Row i of A carries the L_i dependence twice (row and column), halved by the 0.5.
  const Eigen::ArrayXd L2 = e.L.array().square();
  const Eigen::ArrayXXd dlog = 0.5 - (e.inv_s * (-2.0 * e.arg - 1.0)).colwise() * (-L2);
  Eigen::VectorXd g_log_l = (WK * dlog).rowwise().sum().matrix();
  for (Eigen::Index i = 0; i < g_log_l.size(); ++i) {
    if (!data.bounds.contains(e.L[i])) g_log_l[i] = 0.0;  // clamped: no sensitivity
  }

  // Latent mean log_l = K_q B^{-1} l_bar.
  const Eigen::VectorXd u = e.b.solve(Eigen::VectorXd(e.k_q.transpose() * g_log_l));
  const Eigen::MatrixXd WB = e.b.inverse() - e.beta * e.beta.transpose();
  const double snb2 = e.latent.sigma_n_bar * e.latent.sigma_n_bar;

  // sigma_f_bar: dK_q = 2 K_q, dB = 2 K_bar.
  const Eigen::VectorXd kb_beta = e.k_bar * e.beta;
  const double g_sigma_f_bar =
      2.0 * g_log_l.dot(e.log_l) - 2.0 * u.dot(kb_beta) + (WB.array() * e.k_bar.array()).sum();

  // sigma_l_bar: dK/dlog(sigma_l) = K d^2 / sigma_l^2 = -2 K arg.
  const Eigen::MatrixXd dq = (-2.0 * e.k_q.array() * e.arg_q).matrix();
  const Eigen::MatrixXd db = (-2.0 * e.k_bar.array() * e.arg_bar).matrix();
  const double g_sigma_l_bar =
      g_log_l.dot(dq * e.beta) - u.dot(db * e.beta) + 0.5 * (WB.array() * db.array()).sum();

  // sigma_n_bar: dB = 2 sigma_n_bar^2 I.
  const double g_sigma_n_bar = -2.0 * snb2 * u.dot(e.beta) + snb2 * WB.trace();

  Eigen::VectorXd g(Theta::kScalarCount + theta.l_bar.size());
  g << g_sigma_f, g_sigma_n, g_sigma_f_bar, g_sigma_l_bar, g_sigma_n_bar, u + e.beta;
  if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient evaluated to a non-finite value");
  return g;
}

}  // namespace

TrainingData make_training_data(const GroundCandidates& candidates, const SupportSet& support,
                                const LengthScaleBounds& bounds) {
  if (candidates.empty()) throw Error(ErrorCode::PreconditionViolation, "no candidates");
  TrainingData data;
  const auto n = static_cast<Eigen::Index>(candidates.size());
  data.r.resize(n);
  data.z.resize(n);
  std::vector<double> heights;
  heights.reserve(candidates.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    data.r[i] = candidates[static_cast<std::size_t>(i)].r;
    heights.push_back(candidates[static_cast<std::size_t>(i)].z);
  }
  data.height_offset = median(heights);
  for (Eigen::Index i = 0; i < n; ++i) data.z[i] = heights[static_cast<std::size_t>(i)] - data.height_offset;
  data.support_r = Eigen::Map<const Eigen::VectorXd>(support.locations.data(), static_cast<Eigen::Index>(support.size()));
  data.bounds = bounds;
  return data;
}

Eigen::VectorXd Theta::pack() const {
  Eigen::VectorXd x(kScalarCount + l_bar.size());
  x << log_sigma_f, log_sigma_n, log_sigma_f_bar, log_sigma_l_bar, log_sigma_n_bar, l_bar;
  return x;
}

Theta Theta::unpack(const Eigen::VectorXd& packed) {
  if (packed.size() < kScalarCount) throw Error(ErrorCode::PreconditionViolation, "packed theta too short");
  Theta t;
  t.log_sigma_f = packed[0];
  t.log_sigma_n = packed[1];
  t.log_sigma_f_bar = packed[2];
  t.log_sigma_l_bar = packed[3];
  t.log_sigma_n_bar = packed[4];
  t.l_bar = packed.tail(packed.size() - kScalarCount);
  return t;
}

HeightKernelParams Theta::height() const { return {std::exp(log_sigma_f), std::exp(log_sigma_n)}; }

LatentKernelParams Theta::latent() const {
  return {std::exp(log_sigma_f_bar), std::exp(log_sigma_l_bar), std::exp(log_sigma_n_bar)};
}

bool Theta::in_domain() const {
  const double lo = std::log(kMinScale);
  const double hi = std::log(kMaxScale);
  for (const double v : {log_sigma_f, log_sigma_n, log_sigma_f_bar, log_sigma_l_bar, log_sigma_n_bar}) {
    if (!std::isfinite(v) || v < lo || v > hi) return false;
  }
  return l_bar.allFinite();
}

Theta initial_theta(const TrainingData& data, const SupportSet& support) {
  const double n = static_cast<double>(data.size());
  const double mean = data.z.mean();
  const double spread = n > 1 ? std::sqrt((data.z.array() - mean).square().sum() / (n - 1.0)) : 0.0;
  const double extent = data.r.maxCoeff() - data.r.minCoeff();
  Theta t;
  t.log_sigma_f = std::log(std::max(spread, 1e-2));
  t.log_sigma_n = std::log(0.05);
  t.log_sigma_f_bar = 0.0;
  t.log_sigma_l_bar = std::log(std::max(extent / 3.0, 1e-2));
  t.log_sigma_n_bar = std::log(0.1);
  t.l_bar = Eigen::Map<const Eigen::VectorXd>(support.targets.data(), static_cast<Eigen::Index>(support.size()));
  return t;
}

double objective(const Theta& theta, const TrainingData& data) { return evaluate(theta, data).value; }

ObjectiveGradient objective_and_gradient(const Theta& theta, const TrainingData& data) {
  const Evaluation e = evaluate(theta, data);
  return {e.value, gradient_from(e, theta, data)};
}

Eigen::VectorXd gradient(const Theta& theta, const TrainingData& data) {
  return objective_and_gradient(theta, data).gradient;
}

Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + step;
    const double up = f(probe);
    probe[k] = x[k] - step;
    const double down = f(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

Eigen::VectorXd fd_gradient(const Theta& theta, const TrainingData& data, double step) {
  return fd_gradient([&](const Eigen::VectorXd& x) { return objective(Theta::unpack(x), data); }, theta.pack(), step);
}

TrainingResult scg_minimize(const TrainingData& data, const Theta& theta0, const ScgOptions& options) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto recoverable = [](const Error& err) {
    return err.code() == ErrorCode::NonFinite || err.code() == ErrorCode::SingularMatrix;
  };
  // SCG asks for the gradient at the point it just accepted, which is the
  // point whose objective it evaluated last; keep that evaluation around.
  Eigen::VectorXd cached_x;
  std::optional<Evaluation> cached;

  const auto f = [&](const Eigen::VectorXd& x) {
    try {
      cached = evaluate(Theta::unpack(x), data);
      cached_x = x;
      return cached->value;
    } catch (const Error& err) {
      cached.reset();
      if (recoverable(err)) return inf;
      throw;
    }
  };
  const auto g = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    try {
      const Theta theta = Theta::unpack(x);
      if (cached && cached_x.size() == x.size() && cached_x == x) return gradient_from(*cached, theta, data);
      return gradient_from(evaluate(theta, data), theta, data);
    } catch (const Error& err) {
      if (recoverable(err)) return Eigen::VectorXd::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
      throw;
    }
  };

  const ScgResult res = gpseg::scg_minimize(f, g, theta0.pack(), options);
  TrainingResult out;
  out.theta = Theta::unpack(res.x);
  out.value = res.value;
  out.trace = res.trace;
  out.iterations = res.iterations;
  out.stop = res.stop;
  return out;
}

GroundModel build_ground_model(const Theta& theta, const TrainingData& data) {
  const Eigen::VectorXd l_bar =
      theta.l_bar.cwiseMax(std::log(data.bounds.min)).cwiseMin(std::log(data.bounds.max));
  return train_ground_model(data.r, data.z, data.height_offset, data.support_r, l_bar, theta.height(),
                            theta.latent(), data.bounds);
}

}  // namespace gpseg
