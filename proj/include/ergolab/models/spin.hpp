#pragma once

// Glauber dynamics of the Ising model on a ring of L sites, observed through
// binned Poisson counts.
//
// Configurations are 0/1 vectors (stored as doubles so they fit the common
// state interface). Site i flips at rate
//   c_i = 1 / (1 + exp(2 beta s_i (s_{i-1} + s_{i+1}))),  s = 2 sigma - 1,
// and the dynamics is simulated by uniformization with dominating rate 1 per
// site. An event (site i, uniform U) moves a 0 up iff U < c_i and a 1 down
// iff U > 1 - c_i; applying the same events to two ordered configurations
// keeps them ordered.

#include <vector>

#include "ergolab/model.hpp"

namespace ergolab {

struct SpinParams {
  int sites = 32;
  double beta = 0.4;
  double delta = 0.5;   ///< bin width (sampling interval)
  double c0 = 1.0;      ///< baseline observation intensity
  double alpha0 = 1.0;  ///< alpha_i = alpha0 * decay^(ring distance of i from site 0)
  double alpha_decay = 0.5;
};

struct SpinEvent {
  int site;
  double u;
};

class SpinModel final : public StateSpaceModel {
 public:
  explicit SpinModel(SpinParams params = {});

  std::string name() const override { return "spin"; }
  Eigen::Index state_dim() const override { return params_.sites; }

  State step(const State& x, Stream& noise) const override;
  Observation observe(const State& x, Stream& noise) const override;
  double obs_log_density(const State& x, const Observation& y) const override;
  MetricSpec metric() const override;  // weighted Hamming with the observation weights
  State sample_stationary(Stream& noise) const override;
  Observation observation_mean(const State& x) const override;

  /// Flip rate of site i in configuration x.
  double rate(const State& x, int i) const;
  /// Flip rate as a function of the local pattern (left, self, right), entries 0/1.
  double rate(int left, int self, int right) const;
  /// Events of the uniformized clock over one bin.
  std::vector<SpinEvent> draw_events(Stream& noise) const;
  /// Applies one event in place; returns true if the site flipped.
  bool apply(State& x, const SpinEvent& e) const;

  /// Intensity h(x) = c0 + sum alpha_i x_i.
  double intensity(const State& x) const;
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const SpinParams& params() const { return params_; }

  /// Stationary probability of a configuration (exact, ring transfer matrix).
  double gibbs_probability(const State& x) const;

  /// Result of the exhaustive construction-time checks.
  struct RateChecks {
    double max_detailed_balance_error = 0.0;  ///< |c(x) pi(x) - c(x^i) pi(x^i)| relative, over all 8 patterns
    bool attractive = false;                  ///< c_up nondecreasing, c_down nonincreasing in the neighbours
    bool coupling_compatible = false;         ///< c_up(x) + c_down(x') <= 1 whenever x <= x'
    bool bounded = false;                     ///< every rate in (0, 1]
  };
  const RateChecks& rate_checks() const { return checks_; }

 private:
  SpinParams params_;
  Eigen::VectorXd alpha_;
  RateChecks checks_;
};

}  // namespace ergolab
