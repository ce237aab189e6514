#pragma once

// Stochastic delay equation
//   dx(t) = (-a x(t) + b sin(x(t - r))) dt + sigma0 dW(t)
// with observations y = tanh(x(t)) + N(0, obs_variance) at the sampling times.
//
// The state is the segment of the path over [t - r, t] on the Euler grid of
// step h, oldest value first (r / h + 1 entries). Since |sin u - sin v| <=
// |u - v|, two copies driven by the same noise satisfy
//   d|x(t) - x'(t)| <= (-a |x(t) - x'(t)| + b sup_window |x - x'|) dt,
// which contracts whenever a > b.

#include "ergolab/model.hpp"

namespace ergolab {

struct DelayParams {
  double a = 2.0;
  double b = 0.5;
  double sigma0 = 0.5;
  double delay = 1.0;
  double h = 0.01;
  double delta = 1.0;  ///< sampling interval, a multiple of h
  double obs_variance = 0.1;
  double guard = 1e6;
  int burn_in = 20;  ///< sampling intervals from rest used by sample_stationary
};

class DelayModel final : public StateSpaceModel {
 public:
  explicit DelayModel(DelayParams params = {});

  std::string name() const override { return "delay"; }
  Eigen::Index state_dim() const override { return lag_steps_ + 1; }

  State step(const State& window, Stream& noise) const override;
  Observation observe(const State& window, Stream& noise) const override;
  double obs_log_density(const State& window, const Observation& y) const override;
  MetricSpec metric() const override;  // sup over the window
  State sample_stationary(Stream& noise) const override;
  std::optional<Eigen::MatrixXd> observation_covariance() const override;
  Observation observation_mean(const State& window) const override;

  /// Euler-Maruyama over one sampling interval with explicit standard normal
  /// increments (one per Euler step, see euler_steps()).
  State step_with(const State& window, const Eigen::VectorXd& noise) const;
  int euler_steps() const { return sample_steps_; }
  int lag_steps() const { return lag_steps_; }
  const DelayParams& params() const { return params_; }

 private:
  DelayParams params_;
  int lag_steps_;
  int sample_steps_;
};

}  // namespace ergolab
