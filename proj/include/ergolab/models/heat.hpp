#pragma once

// Stochastic heat equation on [0, 1] with Dirichlet boundary, in the sine
// basis e_k(z) = sqrt(2) sin(pi k z): each mode is an independent
// Ornstein-Uhlenbeck process dx_k = -pi^2 k^2 x_k dt + sigma_k dW_k, sampled
// exactly every `delta` time units and observed at points z_i with Gaussian noise.

#include <vector>

#include "ergolab/model.hpp"

namespace ergolab {

struct HeatParams {
  int modes = 8;
  Eigen::VectorXd sigma;  ///< empty -> sigma_k = sigma_scale / k
  double sigma_scale = 1.0;
  double delta = 0.1;
  std::vector<double> obs_points{0.25, 0.5, 0.75};
  double obs_variance = 0.25;
};

class HeatModel final : public StateSpaceModel {
 public:
  explicit HeatModel(HeatParams params = {});

  std::string name() const override { return "heat"; }
  Eigen::Index state_dim() const override { return params_.modes; }

  State step(const State& x, Stream& noise) const override;
  Observation observe(const State& x, Stream& noise) const override;
  double obs_log_density(const State& x, const Observation& y) const override;
  MetricSpec metric() const override;         // H norm
  MetricSpec strong_metric() const override;  // H^1 norm
  State sample_stationary(Stream& noise) const override;
  std::optional<Eigen::MatrixXd> observation_covariance() const override;
  Observation observation_mean(const State& x) const override;

  /// Exact transition with explicit standard normal noise (one entry per mode).
  State step_with(const State& x, const Eigen::VectorXd& noise) const;
  /// Same map over an arbitrary interval.
  State step_with(const State& x, const Eigen::VectorXd& noise, double dt) const;

  const HeatParams& params() const { return params_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  /// pi^2 k^2.
  const Eigen::VectorXd& rates() const { return rates_; }
  /// sigma_k^2 / (2 pi^2 k^2).
  Eigen::VectorXd stationary_variance() const;
  /// Observation matrix H with y = H x + noise.
  const Eigen::MatrixXd& observation_matrix() const { return obs_matrix_; }
  /// n / (12 r): bound on the squared Hellinger gap per unit of squared H^1 distance.
  double hellinger_constant() const;

 private:
  HeatParams params_;
  Eigen::VectorXd sigma_;
  Eigen::VectorXd rates_;
  Eigen::MatrixXd obs_matrix_;
};

}  // namespace ergolab
