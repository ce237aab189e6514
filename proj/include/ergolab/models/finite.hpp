#pragma once

// A finite hidden Markov model seen through the real-valued state interface:
// the state is a one-entry vector holding the hidden index, so particle
// filters and couplings can run on it and be compared with exact answers.

#include "ergolab/hmm.hpp"
#include "ergolab/model.hpp"

namespace ergolab {

class FiniteStateModel final : public StateSpaceModel {
 public:
  /// Hidden chain P0 with emission matrix Phi(x, y); Phi may be omitted for an
  /// unobserved chain (a single symbol emitted with probability one).
  explicit FiniteStateModel(Eigen::MatrixXd P0, std::optional<Eigen::MatrixXd> emission = std::nullopt,
                            std::optional<Categorical> stationary = std::nullopt);
  /// Requires the hidden-Markov form (an emission matrix).
  explicit FiniteStateModel(const FiniteHMM& hmm);

  std::string name() const override { return "finite"; }
  Eigen::Index state_dim() const override { return 1; }

  State step(const State& x, Stream& noise) const override;
  Observation observe(const State& x, Stream& noise) const override;
  double obs_log_density(const State& x, const Observation& y) const override;
  MetricSpec metric() const override;  // discrete metric
  State sample_stationary(Stream& noise) const override;

  int states() const { return static_cast<int>(P0_.rows()); }
  const Eigen::MatrixXd& P0() const { return P0_; }
  const Eigen::MatrixXd& emission() const { return emission_; }

  /// Histogram of a particle cloud over the hidden states.
  Categorical histogram(const AtomicMeasure& cloud) const;

 private:
  int index(const State& x) const;

  Eigen::MatrixXd P0_;
  Eigen::MatrixXd emission_;
  Categorical stationary_;
};

}  // namespace ergolab
