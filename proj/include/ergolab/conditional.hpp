#pragma once

// Conditional ergodicity on finite HMMs: given an observation window, the
// unobserved process is an inhomogeneous Markov chain whose transition
// matrices are computed exactly from backward variables.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ergolab/hmm.hpp"

namespace ergolab {

struct ConditionalChain {
  /// transitions[t - 1](z, z') = P[Z_t = z' | Z_{t-1} = z, Y_0..Y_T], t = 1..T.
  std::vector<Eigen::MatrixXd> transitions;
  /// P[Z_0 = . | Y_0..Y_T] under the joint stationary law.
  Categorical initial;

  int horizon() const { return static_cast<int>(transitions.size()); }
  /// Rows of M_1 ... M_n.
  Eigen::MatrixXd product(int n) const;
};

ConditionalChain conditional_transitions(const FiniteHMM& hmm, std::span<const int> y);

/// Default buffer between the largest probed lag and the window end.
inline int default_margin(int horizon) { return horizon / 4; }

double conditional_tv(const ConditionalChain& chain, int z0, int z0b, int n, int margin);
double conditional_tv(const FiniteHMM& hmm, std::span<const int> y, int z0, int z0b, int n);

/// sum_z w(z) |row_z(M_1..M_n) - w M_1..M_n| with w the conditional law of Z_0.
double conditional_beta(const ConditionalChain& chain, int n, int margin);
double conditional_beta(const FiniteHMM& hmm, std::span<const int> y, int n);

struct InheritanceTable {
  std::vector<int> lags;
  std::vector<double> max_tv;   ///< max over paths and ordered initial pairs
  std::vector<double> mean_tv;  ///< mean over paths and ordered initial pairs
  /// Per path (row) and lag (column): max over initial pairs.
  Eigen::MatrixXd per_path;
  bool nondegenerate = false;
  double joint_beta = 0.0;          ///< beta mixing coefficient of the joint chain at the largest lag
  double truncation_delta = 0.0;    ///< max change of conditional TV when the window is doubled
};

InheritanceTable inheritance_experiment(const FiniteHMM& hmm, int n_paths, int T, std::span<const int> lags,
                                        std::uint64_t seed);

}  // namespace ergolab
