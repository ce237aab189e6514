#pragma once

// Couplings of two copies of a model and the statistics built on them:
// coupling probabilities, Hellinger-Lipschitz constants of the observation
// densities, and the disagreement decay of the monotone spin coupling.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ergolab/model.hpp"
#include "ergolab/models/spin.hpp"

namespace ergolab {

struct CoupledPair {
  std::vector<State> first, second;  ///< empty unless states were kept
  std::vector<double> d;             ///< model.metric() at n = 0..T
  std::vector<double> d_tilde;       ///< model.strong_metric() at n = 0..T
};

enum class CouplingKind {
  synchronous,  ///< both copies consume the identical noise stream
  independent,  ///< each copy has its own stream
};

CoupledPair coupling_run(const StateSpaceModel& model, const State& x0, const State& x0b, int T, CouplingKind kind,
                         std::uint64_t seed, std::uint64_t replica = 0, bool keep_states = false);

inline CoupledPair synchronous_coupling_run(const StateSpaceModel& model, const State& x0, const State& x0b, int T,
                                            std::uint64_t seed, std::uint64_t replica = 0, bool keep_states = false) {
  return coupling_run(model, x0, x0b, T, CouplingKind::synchronous, seed, replica, keep_states);
}

struct MonotoneRun {
  CoupledPair pair;
  std::int64_t events = 0;
  std::int64_t order_violations = 0;
  std::vector<int> disagreements;  ///< number of differing sites at n = 0..T
};

/// Runs the same clock events on both configurations for T bins. Requires x0 <= x0b sitewise.
/// With `strict`, an order violation throws std::logic_error (it would be a bug).
MonotoneRun monotone_coupling_run(const SpinModel& model, const State& x0, const State& x0b, int T, std::uint64_t seed,
                                  std::uint64_t replica = 0, bool strict = true);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(int successes, int trials, double z = 1.959964);

/// Coupling success statistics for one initial pair.
struct CouplingReport {
  int replicas = 0;
  int successes = 0;
  double alpha_hat = 0.0;
  Interval wilson;
  std::vector<double> tail_sums;  ///< sum_{T/2 < n <= T} d~_n^2 per replica
};

struct AlphaOptions {
  int horizon = 400;
  double epsilon = 1e-6;
  int replicas = 20;
  CouplingKind kind = CouplingKind::synchronous;
  bool doubled_horizon_check = false;  ///< also rerun with 2T and report the change
};

struct AlphaSummary {
  std::vector<CouplingReport> per_pair;
  std::size_t worst_pair = 0;
  double alpha_min = 0.0;
  std::optional<double> alpha_min_doubled;
};

/// Replicas for one initial pair; replica r of pair i uses stream replica (i << 32 | r).
CouplingReport alpha_for_pair(const StateSpaceModel& model, const std::pair<State, State>& pair, int horizon,
                              const AlphaOptions& options, std::uint64_t seed, std::uint64_t pair_index);

/// Per replica, success iff the tail half-sum of d~^2 is below epsilon; reports
/// the minimum estimate over the initial pairs.
AlphaSummary alpha_estimate(const StateSpaceModel& model, std::span<const std::pair<State, State>> init_pairs,
                            const AlphaOptions& options, std::uint64_t seed);

/// Squared Hellinger distance between N(a, S) and N(b, S): 2 - 2 exp(-(a - b)' S^-1 (a - b) / 8).
double hellinger_gap_gaussian(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cov);

struct HellingerCheck {
  double max_ratio = 0.0;  ///< max over pairs of gap / d~^2
  double C_hat = 0.0;      ///< equal to max_ratio, the empirical Lipschitz constant
  double max_gap = 0.0;
  std::vector<double> ratios;
};

/// Requires a Gaussian observation model; throws InvalidArgument otherwise.
HellingerCheck hellinger_lipschitz_check(const StateSpaceModel& model, std::span<const std::pair<State, State>> pairs,
                                         const MetricSpec& metric);

struct DecayFit {
  double gamma_hat = 0.0;
  Interval ci;                  ///< bootstrap percentile interval over replicas
  std::vector<double> times;
  std::vector<double> mean_disagreement;
  int fit_points = 0;           ///< leading points used in the log-linear fit
};

/// Disagreement decay of the monotone coupling from all-down vs all-up, fitted as
/// log mean D(t) = c - gamma t over the points where mean D >= 1.
DecayFit disagreement_decay_fit(const SpinModel& model, int replicas, int T, std::uint64_t seed,
                                int bootstrap = 200, double level = 0.95);

}  // namespace ergolab
