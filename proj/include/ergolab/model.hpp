#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "ergolab/measure.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

using State = Eigen::VectorXd;
using Observation = Eigen::VectorXd;

/// A sampled (discrete-time) hidden Markov model on a real state vector.
///
/// All randomness of `step` and `observe` comes from the stream handed in,
/// so two calls with streams in the same position produce identical noise:
/// that is how synchronous couplings and common-random-number filters are
/// built on top of this interface.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index state_dim() const = 0;

  /// Advances the unobserved state by one sampling interval.
  virtual State step(const State& x, Stream& noise) const = 0;
  virtual Observation observe(const State& x, Stream& noise) const = 0;
  /// log g(x, y); finite for every x and every observation the model can emit.
  virtual double obs_log_density(const State& x, const Observation& y) const = 0;

  /// The metric d on states and the stronger metric d~ >= d used by couplings.
  virtual MetricSpec metric() const = 0;
  virtual MetricSpec strong_metric() const { return metric(); }

  /// A draw from (an approximation of) the invariant law.
  virtual State sample_stationary(Stream& noise) const = 0;

  /// Gaussian observation models y = mean(x) + N(0, covariance).
  virtual std::optional<Eigen::MatrixXd> observation_covariance() const { return std::nullopt; }
  virtual Observation observation_mean(const State& x) const;
};

}  // namespace ergolab
