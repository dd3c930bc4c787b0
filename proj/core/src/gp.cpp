#include "gpseg/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gpseg/errors.hpp"

namespace gpseg {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::DomainError, std::string(name) + " must be positive and finite");
  }
}

void validate(const LatentKernelParams& p) {
  require_positive(p.sigma_f_bar, "sigma_f_bar");
  require_positive(p.sigma_l_bar, "sigma_l_bar");
  require_positive(p.sigma_n_bar, "sigma_n_bar");
}

}  // namespace

double LengthScaleBounds::clamp(double length_scale) const noexcept { return std::clamp(length_scale, min, max); }

double ns_kernel(double r_i, double r_j, double L_i, double L_j, double sigma_f) {
  require_positive(L_i, "L_i");
  require_positive(L_j, "L_j");
  require_positive(sigma_f, "sigma_f");
  const double s = L_i * L_i + L_j * L_j;
  const double d = r_i - r_j;
  // The single product of the two fourth roots keeps the result bit-symmetric in (i, j).
  const double roots = std::sqrt(std::sqrt(L_i * L_i)) * std::sqrt(std::sqrt(L_j * L_j));
  return sigma_f * sigma_f * roots / std::sqrt(s / 2.0) * std::exp(-d * d / s);
}

double se_kernel(double a, double b, const LatentKernelParams& params) {
  validate(params);
  const double d = a - b;
  return params.sigma_f_bar * params.sigma_f_bar *
         std::exp(-0.5 * d * d / (params.sigma_l_bar * params.sigma_l_bar));
}

Eigen::MatrixXd ns_cross(const Eigen::VectorXd& rows_r, const Eigen::VectorXd& rows_L, const Eigen::VectorXd& cols_r,
                         const Eigen::VectorXd& cols_L, double sigma_f) {
  const Eigen::Index n = rows_r.size();
  const Eigen::Index m = cols_r.size();
  // The kernel is symmetric, so fill along the longer axis and transpose when needed.
  if (n < m) return ns_cross(cols_r, cols_L, rows_r, rows_L, sigma_f).transpose();
  // (Li^2)^(1/4) (Lj^2)^(1/4) ((Li^2+Lj^2)/2)^(-1/2) == sqrt(2 Li Lj / s) for positive L.
  // Column-wise expressions let Eigen vectorize exp and sqrt without a scalar fill loop.
  const Eigen::ArrayXd Li = rows_L.array();
  const Eigen::ArrayXd Li2 = Li.square();
  const double sf2 = sigma_f * sigma_f;
  Eigen::MatrixXd out(n, m);
  Eigen::ArrayXd inv_s(n);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double Lj = cols_L[j];
    inv_s = (Li2 + Lj * Lj).inverse();
    out.col(j) = sf2 * (2.0 * Lj * Li * inv_s).sqrt() * (-(rows_r.array() - cols_r[j]).square() * inv_s).exp();
  }
  return out;
}

Eigen::MatrixXd ns_gram(const Eigen::VectorXd& r, const Eigen::VectorXd& L, double sigma_f) {
  Eigen::MatrixXd K = ns_cross(r, L, r, L, sigma_f);
  K.diagonal().setConstant(sigma_f * sigma_f);
  return K;
}

Eigen::MatrixXd se_cross(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const LatentKernelParams& params) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (n < m) return se_cross(b, a, params).transpose();
  const double inv = -0.5 / (params.sigma_l_bar * params.sigma_l_bar);
  const double sf2 = params.sigma_f_bar * params.sigma_f_bar;
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index j = 0; j < m; ++j) out.col(j) = sf2 * ((a.array() - b[j]).square() * inv).exp();
  return out;
}

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& matrix) {
  constexpr std::array<double, 4> ladder{0.0, 1e-10, 1e-8, 1e-6};
  if (!matrix.allFinite()) throw Error(ErrorCode::SingularMatrix, "matrix has non-finite entries");
  for (const double jitter : ladder) {
    Eigen::MatrixXd m = matrix;
    m.diagonal().array() += jitter;
    llt_.compute(m);
    if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
      jitter_ = jitter;
      return;
    }
  }
  throw Error(ErrorCode::SingularMatrix,
              "Cholesky failed for a " + std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()) +
                  " matrix after jitter 1e-6");
}

double JitteredCholesky::log_determinant() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd JitteredCholesky::inverse() const {
  // A^{-1} = X'X with X = L^{-1}. Both steps only touch triangles; at n ~ 30 this
  // beats the blocked triangular solve plus GEMM by a wide margin.
  const Eigen::Index n = llt_.rows();
  const Eigen::MatrixXd lt = llt_.matrixLLT().triangularView<Eigen::Lower>().transpose();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x(j, j) = 1.0 / lt(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      x(i, j) = -lt.col(i).segment(j, i - j).dot(x.col(j).segment(j, i - j)) / lt(i, i);
    }
  }
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      out(i, j) = x.col(i).tail(n - i).dot(x.col(j).tail(n - i));
      out(j, i) = out(i, j);
    }
  }
  return out;
}

LatentPosterior::LatentPosterior(Eigen::VectorXd locations, const Eigen::VectorXd& targets,
                                 const LatentKernelParams& params)
    : locations_(std::move(locations)), params_(params) {
  validate(params_);
  if (locations_.size() == 0 || locations_.size() != targets.size()) {
    throw Error(ErrorCode::PreconditionViolation, "latent support must be non-empty with matching targets");
  }
  Eigen::MatrixXd B = se_cross(locations_, locations_, params_);
  B.diagonal().array() += params_.sigma_n_bar * params_.sigma_n_bar;
  factor_ = JitteredCholesky(B);
  weights_ = factor_.solve(targets);
}

Eigen::VectorXd LatentPosterior::mean(const Eigen::VectorXd& queries) const {
  return se_cross(queries, locations_, params_) * weights_;
}

std::vector<double> latent_predict(const SupportSet& support, std::span<const double> queries,
                                   const LatentKernelParams& params) {
  const LatentPosterior posterior(Eigen::Map<const Eigen::VectorXd>(support.locations.data(),
                                                                    static_cast<Eigen::Index>(support.size())),
                                  Eigen::Map<const Eigen::VectorXd>(support.targets.data(),
                                                                    static_cast<Eigen::Index>(support.size())),
                                  params);
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(queries.data(), static_cast<Eigen::Index>(queries.size()));
  const Eigen::VectorXd mean = posterior.mean(q);
  return {mean.data(), mean.data() + mean.size()};
}

Eigen::VectorXd GroundModel::length_scales_at(const Eigen::VectorXd& queries) const {
  const Eigen::VectorXd weights = b_factor.solve(support_l);
  const Eigen::VectorXd log_l = se_cross(queries, support_r, latent) * weights;
  return log_l.array().exp().cwiseMax(bounds.min).cwiseMin(bounds.max).matrix();
}

GroundModel train_ground_model(const Eigen::VectorXd& r, const Eigen::VectorXd& z_centred, double height_offset,
                               const Eigen::VectorXd& support_r, const Eigen::VectorXd& support_l,
                               const HeightKernelParams& height, const LatentKernelParams& latent,
                               const LengthScaleBounds& bounds) {
  require_positive(height.sigma_f, "sigma_f");
  require_positive(height.sigma_n, "sigma_n");
  if (r.size() == 0 || r.size() != z_centred.size()) {
    throw Error(ErrorCode::PreconditionViolation, "training set must be non-empty with matching heights");
  }
  const LatentPosterior latent_post(support_r, support_l, latent);

  GroundModel model;
  model.r = r;
  model.z = z_centred;
  model.height_offset = height_offset;
  model.height = height;
  model.latent = latent;
  model.bounds = bounds;
  model.support_r = support_r;
  model.support_l = support_l;
  model.b_factor = latent_post.factor();
  model.length_scales = latent_post.mean(r).array().exp().cwiseMax(bounds.min).cwiseMin(bounds.max).matrix();

  Eigen::MatrixXd A = ns_gram(r, model.length_scales, height.sigma_f);
  A.diagonal().array() += height.sigma_n * height.sigma_n;
  model.a_factor = JitteredCholesky(A);
  model.alpha = model.a_factor.solve(z_centred);
  return model;
}

std::vector<Posterior> height_posterior(const GroundModel& model, const Eigen::VectorXd& query_r,
                                        const Eigen::VectorXd& query_L) {
  if (query_r.size() != query_L.size()) {
    throw Error(ErrorCode::PreconditionViolation, "query radii and length-scales differ in size");
  }
  if (query_L.size() > 0 && !(query_L.minCoeff() > 0.0)) {
    throw Error(ErrorCode::DomainError, "query length-scales must be positive");
  }
  // k* is (n_train x n_query); V = k** - ||L^{-1} k*||^2 per column.
  const Eigen::MatrixXd k_star = ns_cross(model.r, model.length_scales, query_r, query_L, model.height.sigma_f);
  const Eigen::VectorXd mean = k_star.transpose() * model.alpha;
  const Eigen::MatrixXd v = model.a_factor.llt().matrixL().solve(k_star);
  const double prior = model.height.sigma_f * model.height.sigma_f;

  std::vector<Posterior> out(static_cast<std::size_t>(query_r.size()));
  for (Eigen::Index q = 0; q < query_r.size(); ++q) {
    const double var = prior - v.col(q).squaredNorm();
    out[static_cast<std::size_t>(q)] = Posterior{mean[q] + model.height_offset, std::max(var, 0.0)};
  }
  return out;
}

}  // namespace gpseg
