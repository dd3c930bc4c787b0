#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "gpseg/gp.hpp"
#include "gpseg/lines.hpp"
#include "gpseg/scg.hpp"

namespace gpseg {

/// Everything the per-segment objective needs besides theta.
struct TrainingData {
  Eigen::VectorXd r;          // candidate radii
  Eigen::VectorXd z;          // candidate heights, centred
  double height_offset = 0.0;  // the median that was subtracted
  Eigen::VectorXd support_r;  // latent training locations
  LengthScaleBounds bounds;

  std::size_t size() const noexcept { return static_cast<std::size_t>(r.size()); }
  std::size_t support_size() const noexcept { return static_cast<std::size_t>(support_r.size()); }
};

/// Centres candidate heights on their median and copies the support locations.
TrainingData make_training_data(const GroundCandidates& candidates, const SupportSet& support,
                                const LengthScaleBounds& bounds);

/// Hyperparameters in log space; l_bar holds the latent targets (log-metres).
struct Theta {
  static constexpr Eigen::Index kScalarCount = 5;
  static constexpr double kMinScale = 1e-4;
  static constexpr double kMaxScale = 1e4;

  double log_sigma_f = 0.0;
  double log_sigma_n = 0.0;
  double log_sigma_f_bar = 0.0;
  double log_sigma_l_bar = 0.0;
  double log_sigma_n_bar = 0.0;
  Eigen::VectorXd l_bar;

  /// Layout: [sigma_f, sigma_n, sigma_f_bar, sigma_l_bar, sigma_n_bar, l_bar...].
  Eigen::VectorXd pack() const;
  static Theta unpack(const Eigen::VectorXd& packed);

  HeightKernelParams height() const;
  LatentKernelParams latent() const;
  /// True when every scale lies in [kMinScale, kMaxScale] and all entries are finite.
  bool in_domain() const;
};

/// Data-scaled starting point: sigma_f from the height spread, sigma_n 5 cm,
/// latent magnitude 1, latent length a third of the radial extent, latent
/// noise 0.1 and l_bar from the support set.
Theta initial_theta(const TrainingData& data, const SupportSet& support);

/// Negative log posterior of one segment:
/// 0.5 [z'A^{-1}z + log|A| + l'B^{-1}l + log|B| + (n + nbar) log 2pi].
/// Throws NonFinite when theta is out of domain and SingularMatrix when a
/// factorization fails.
double objective(const Theta& theta, const TrainingData& data);

struct ObjectiveGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;  // packed layout
};

ObjectiveGradient objective_and_gradient(const Theta& theta, const TrainingData& data);
Eigen::VectorXd gradient(const Theta& theta, const TrainingData& data);

/// Central differences, coordinate-wise, on the packed layout.
Eigen::VectorXd fd_gradient(const Theta& theta, const TrainingData& data, double step);
Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double step);

struct TrainingResult {
  Theta theta;
  double value = 0.0;
  std::vector<double> trace;
  std::size_t iterations = 0;
  ScgStop stop = ScgStop::MaxIterations;
};

TrainingResult scg_minimize(const TrainingData& data, const Theta& theta0, const ScgOptions& options);

/// Trained model for theta; l_bar is clamped into the length-scale bounds.
GroundModel build_ground_model(const Theta& theta, const TrainingData& data);

}  // namespace gpseg
