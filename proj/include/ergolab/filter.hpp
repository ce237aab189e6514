#pragma once

// The nonlinear filter: the exact Bayes recursion U(nu, y, y') on finite
// HMMs, a bootstrap particle filter for the state-space models, stability
// runs comparing two filters fed the same observations, and one step of the
// measure-valued chain (pi_n, Y_n).
//
// Convention: pi_0 is the prior itself and pi_{n+1} = U(pi_n, y_n, y_{n+1}),
// so y_0 only enters through g(x, y_0, x', y_1).

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/hmm.hpp"
#include "ergolab/measure.hpp"
#include "ergolab/model.hpp"

namespace ergolab {

/// nu'(x') proportional to sum_x nu(x) P0(x, x') g(x, y, x', y2).
Categorical filter_update_exact(const FiniteHMM& hmm, const Categorical& nu, int y, int y2);

/// pi_0 .. pi_T for the observations y_0 .. y_T.
std::vector<Categorical> exact_filter(const FiniteHMM& hmm, const Categorical& mu, std::span<const int> y);

/// Same quantity by summing over every hidden path; T <= 10 and at most 8 hidden states.
std::vector<Categorical> brute_force_filter(const FiniteHMM& hmm, const Categorical& mu, std::span<const int> y);

struct ParticleConfig {
  Eigen::Index particles = 1000;
  double resample_threshold = 0.5;  ///< resample when ESS < threshold * particles
};

void validate(const ParticleConfig& cfg);

/// Effective sample size 1 / sum w_i^2.
double effective_sample_size(const Eigen::VectorXd& weights);

/// Systematic resampling with one uniform; returns the selected indices.
std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Eigen::Index count, double u);

/// One bootstrap step: propagate, reweight by g(x', y), resample if the ESS is low.
///
/// Particle i draws its transition noise from substream (step << 32 | i) of
/// `key`, and the resampling uniform from substream (step << 32 | 0xffffffff).
/// Two filters given the same key therefore share their random numbers.
AtomicMeasure filter_update_particle(const StateSpaceModel& model, const AtomicMeasure& cloud, const Observation& y,
                                     const ParticleConfig& cfg, StreamKey key, std::uint64_t step);
AtomicMeasure filter_update_particle(const StateSpaceModel& model, const AtomicMeasure& cloud, const Observation& y,
                                     const ParticleConfig& cfg, std::uint64_t seed);

/// Advances two filters on the same observation. Propagation noise is shared
/// per particle slot as above. When both filters resample, ancestors are drawn
/// by a maximal coupling of the two multinomial laws: with probability
/// sum_i min(w_i, w'_i) both slots take a common index, otherwise each draws
/// from its own residual. Each filter on its own is an ordinary bootstrap filter.
std::pair<AtomicMeasure, AtomicMeasure> coupled_filter_update(const StateSpaceModel& model, const AtomicMeasure& a,
                                                              const AtomicMeasure& b, const Observation& y,
                                                              const ParticleConfig& cfg, StreamKey key,
                                                              std::uint64_t step);

/// N equally weighted draws.
using StateSampler = std::function<State(Stream&)>;
AtomicMeasure sample_cloud(const StateSampler& sampler, Eigen::Index n, Stream& stream);

struct StabilityCurve {
  std::string kind;         ///< "tv" or "bl"
  std::string sigma_field;  ///< what the distance sees: "full", "local-window", ...
  std::vector<int> steps;
  std::vector<double> distance;
};

/// Exact filters from mu and nu along one stationary path of the HMM.
StabilityCurve stability_run(const FiniteHMM& hmm, const Categorical& mu, const Categorical& nu, int T,
                             std::uint64_t seed, std::uint64_t replica = 0);

/// Distance between two particle clouds.
using CloudDistance = std::function<double(const AtomicMeasure&, const AtomicMeasure&)>;

struct CloudDistanceSpec {
  std::string kind;
  std::string sigma_field;
  CloudDistance fn;
};

/// Exact bounded-Lipschitz distance with the given metric (seeded subsampling above the atom cap).
CloudDistanceSpec bl_cloud_distance(MetricSpec metric, BlOptions options = {.subsample = true});
/// TV between the laws of the listed coordinates, for clouds of 0/1 configurations.
CloudDistanceSpec window_tv_distance(std::vector<Eigen::Index> coords);
/// TV between histograms of integer-valued one-dimensional clouds with `states` values.
CloudDistanceSpec finite_tv_distance(int states);

struct ParticleStabilityOptions {
  ParticleConfig filter;
  int horizon = 50;
  int record_every = 1;  ///< distances at n = 0, record_every, ... and at the horizon
  bool coupled_resampling = true;  ///< coupled_filter_update instead of two independent updates
};

/// Simulates a trajectory from `truth`, runs particle filters from priors mu and nu on its observations
/// with common random numbers, and records their distance.
StabilityCurve stability_run(const StateSpaceModel& model, const StateSampler& mu, const StateSampler& nu,
                             const StateSampler& truth, const CloudDistanceSpec& distance,
                             const ParticleStabilityOptions& options, std::uint64_t seed, std::uint64_t replica = 0);

/// Pointwise median over curves sharing the same steps.
StabilityCurve median_curve(std::span<const StabilityCurve> curves);

/// Mean over the last quarter of the curve (at least one point) relative to the first quarter.
double tail_to_head_ratio(const StabilityCurve& curve);
/// The decrease criterion used for median curves: tail_to_head_ratio <= 0.5.
inline constexpr double kDecreaseRatio = 0.5;
bool decreasing(const StabilityCurve& curve);

/// A state of the chain (pi_n, Y_n).
struct FilterPoint {
  Categorical filter;
  int symbol = 0;
};

/// One transition of the filter kernel: x ~ nu, (x', y') ~ P(x, y, .), returns (U(nu, y, y'), y').
FilterPoint gamma_step(const FiniteHMM& hmm, const FilterPoint& state, Stream& stream);
FilterPoint gamma_step(const FiniteHMM& hmm, const FilterPoint& state, std::uint64_t seed);

struct BatchMean {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> batches;
};

struct GammaErgodicityReport {
  /// Time averages of nu(f) and nu(f)^2 with f(x) = x, for the two initializations.
  BatchMean first[2], second[2];
  /// Frequencies of the observed symbols along the first run, and the stationary law of Y.
  Eigen::VectorXd symbol_frequency;
  Eigen::VectorXd symbol_stationary;
  bool agree = false;  ///< both moments within 3 combined standard errors
};

GammaErgodicityReport gamma_ergodicity_probe(const FiniteHMM& hmm, const FilterPoint& a, const FilterPoint& b,
                                             int steps, std::uint64_t seed, int batches = 50);

BatchMean batch_mean(std::span<const double> series, int batches);

}  // namespace ergolab
