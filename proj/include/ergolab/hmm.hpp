#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/markov.hpp"
#include "ergolab/measure.hpp"

namespace ergolab {

using ObservationPath = std::vector<int>;

/// A finite bivariate chain (X, Y) whose joint kernel factors as
///   P(x, y; x', y') = g(x, y, x', y') P0(x, x') Q(y, y').
/// The hidden-Markov special case stores P0 and an emission matrix Phi with
/// Q uniform and g = l * Phi(x', y').
class FiniteHMM {
 public:
  FiniteHMM(Eigen::MatrixXd P0, Eigen::MatrixXd Q, std::vector<double> g);

  static FiniteHMM hidden_markov(Eigen::MatrixXd P0, Eigen::MatrixXd emission);

  int hidden_states() const { return static_cast<int>(P0_.rows()); }
  int symbols() const { return static_cast<int>(Q_.rows()); }
  const Eigen::MatrixXd& P0() const { return P0_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const std::optional<Eigen::MatrixXd>& emission() const { return emission_; }

  double g(int x, int y, int x2, int y2) const {
    return g_[((static_cast<std::size_t>(x) * symbols() + y) * hidden_states() + x2) * symbols() + y2];
  }
  double kernel(int x, int y, int x2, int y2) const { return g(x, y, x2, y2) * P0_(x, x2) * Q_(y, y2); }

  /// Strict positivity of g.
  bool nondegenerate() const { return min_g_ > 0.0; }

  /// The joint chain on pairs, state index x * symbols() + y.
  const FiniteChain& joint_chain() const { return joint_; }
  /// Stationary law of the joint chain.
  const Categorical& joint_stationary() const;
  /// X-marginal of the joint stationary law.
  Categorical hidden_stationary() const;

 private:
  Eigen::MatrixXd P0_, Q_;
  std::vector<double> g_;
  std::optional<Eigen::MatrixXd> emission_;
  double min_g_ = 0.0;
  FiniteChain joint_;
  mutable std::optional<Categorical> joint_stationary_;
};

struct HmmPath {
  std::vector<int> hidden;
  ObservationPath observed;
};

/// Exact draw of (X_0..X_T, Y_0..Y_T) started from the joint stationary law.
HmmPath simulate(const FiniteHMM& hmm, int T, std::uint64_t seed, std::uint64_t replica = 0);

/// Draws an index from a probability row by inversion with one uniform.
template <typename Row>
int sample_index(const Row& probs, double u) {
  double cdf = 0.0;
  const auto last = static_cast<int>(probs.size()) - 1;
  for (int i = 0; i < last; ++i) {
    cdf += probs(i);
    if (u < cdf) return i;
  }
  return last;
}

}  // namespace ergolab
