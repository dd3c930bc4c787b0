#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpseg/lines.hpp"

namespace gpseg {

struct HeightKernelParams {
  double sigma_f = 1.0;  // m
  double sigma_n = 0.05;  // m
};

struct LatentKernelParams {
  double sigma_f_bar = 1.0;  // log-m
  double sigma_l_bar = 1.0;  // m
  double sigma_n_bar = 0.1;  // log-m
};

struct LengthScaleBounds {
  double min = 0.5;
  double max = 50.0;

  double clamp(double length_scale) const noexcept;
  bool contains(double length_scale) const noexcept { return length_scale > min && length_scale < max; }
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Non-stationary covariance with a length-scale at each input:
/// sigma_f^2 (Li^2)^(1/4) (Lj^2)^(1/4) ((Li^2+Lj^2)/2)^(-1/2) exp(-(ri-rj)^2 / (Li^2+Lj^2)).
double ns_kernel(double r_i, double r_j, double L_i, double L_j, double sigma_f);

/// Stationary squared exponential used by the latent process.
double se_kernel(double a, double b, const LatentKernelParams& params);

/// Gram matrices without the noise diagonal. No argument checks.
Eigen::MatrixXd ns_gram(const Eigen::VectorXd& r, const Eigen::VectorXd& L, double sigma_f);
Eigen::MatrixXd ns_cross(const Eigen::VectorXd& rows_r, const Eigen::VectorXd& rows_L, const Eigen::VectorXd& cols_r,
                         const Eigen::VectorXd& cols_L, double sigma_f);
Eigen::MatrixXd se_cross(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const LatentKernelParams& params);

/// Cholesky of a symmetric matrix with additive diagonal jitter. The first
/// attempt is unjittered; retries add 1e-10, 1e-8, 1e-6.
class JitteredCholesky {
 public:
  JitteredCholesky() = default;
  /// Throws SingularMatrix when even the largest jitter fails.
  explicit JitteredCholesky(const Eigen::MatrixXd& matrix);

  double jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return llt_.rows(); }
  double log_determinant() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd inverse() const;
  const Eigen::LLT<Eigen::MatrixXd>& llt() const noexcept { return llt_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// Posterior of the latent log length-scale process given a support set.
class LatentPosterior {
 public:
  LatentPosterior(Eigen::VectorXd locations, const Eigen::VectorXd& targets, const LatentKernelParams& params);

  /// Posterior mean in log-metres; exponentiation is left to the caller.
  Eigen::VectorXd mean(const Eigen::VectorXd& queries) const;

  const JitteredCholesky& factor() const noexcept { return factor_; }
  const LatentKernelParams& params() const noexcept { return params_; }

 private:
  Eigen::VectorXd locations_;
  LatentKernelParams params_;
  JitteredCholesky factor_;
  Eigen::VectorXd weights_;  // B^{-1} l_bar
};

std::vector<double> latent_predict(const SupportSet& support, std::span<const double> queries,
                                   const LatentKernelParams& params);

/// Trained height regression for one segment.
struct GroundModel {
  Eigen::VectorXd r;              // training locations
  Eigen::VectorXd z;              // centred training heights
  Eigen::VectorXd length_scales;  // at r, clamped
  double height_offset = 0.0;     // added back on prediction
  HeightKernelParams height;
  LatentKernelParams latent;
  LengthScaleBounds bounds;
  Eigen::VectorXd support_r;
  Eigen::VectorXd support_l;
  JitteredCholesky a_factor;  // K(r,r) + sigma_n^2 I
  JitteredCholesky b_factor;  // Kbar(rbar,rbar) + sigma_n_bar^2 I
  Eigen::VectorXd alpha;      // A^{-1} z

  /// exp of the latent mean at each query, clamped to bounds.
  Eigen::VectorXd length_scales_at(const Eigen::VectorXd& queries) const;
};

/// Builds the latent posterior from (support_r, support_l), predicts the
/// training length-scales and factors A. `z_centred` excludes the offset.
GroundModel train_ground_model(const Eigen::VectorXd& r, const Eigen::VectorXd& z_centred, double height_offset,
                               const Eigen::VectorXd& support_r, const Eigen::VectorXd& support_l,
                               const HeightKernelParams& height, const LatentKernelParams& latent,
                               const LengthScaleBounds& bounds);

std::vector<Posterior> height_posterior(const GroundModel& model, const Eigen::VectorXd& query_r,
                                        const Eigen::VectorXd& query_L);

}  // namespace gpseg
