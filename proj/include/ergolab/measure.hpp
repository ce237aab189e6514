#pragma once

// Probability vectors, weighted point clouds and the distances between them.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ergolab/error.hpp"

namespace ergolab {

/// Tolerance on the total mass of every probability vector.
inline constexpr double kProbabilityTol = 1e-12;
/// Upper bound of the total variation norm 2 sup_A |mu(A) - nu(A)|.
inline constexpr double kTvMax = 2.0;

/// A probability vector over an indexed finite support.
class Categorical {
 public:
  Categorical() = default;
  explicit Categorical(Eigen::VectorXd probs);

  /// Rescales nonnegative weights to unit mass.
  static Categorical normalized(Eigen::VectorXd weights);
  static Categorical uniform(Eigen::Index n);
  static Categorical point(Eigen::Index n, Eigen::Index at);

  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return probs_.size(); }
  double operator[](Eigen::Index i) const { return probs_(i); }

 private:
  Eigen::VectorXd probs_;
};

/// Weighted atoms in R^dim, stored column-wise.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  AtomicMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd weights);

  static AtomicMeasure uniform(Eigen::MatrixXd atoms);
  static AtomicMeasure point(const Eigen::VectorXd& x);

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }
  Eigen::Index dim() const { return atoms_.rows(); }

  /// Integral of f over the measure.
  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i) s += weights_(i) * f(atoms_.col(i));
    return s;
  }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

/// The metric used on atoms.
///
///   euclidean         sqrt(sum (x_i - y_i)^2)
///   weighted_sobolev  sqrt(sum w_i (x_i - y_i)^2), w_i = scale_i * mode_i^(2s)
///   weighted_hamming  sum alpha_i [x_i != y_i]
///   weighted_sup      max w_i |x_i - y_i|
class MetricSpec {
 public:
  enum class Kind { euclidean, weighted_sobolev, weighted_hamming, weighted_sup };

  static MetricSpec euclidean() { return MetricSpec(Kind::euclidean, {}); }
  static MetricSpec sobolev(double s, const Eigen::VectorXd& mode_weights);
  static MetricSpec sobolev(double s, const Eigen::VectorXd& mode_weights, const Eigen::VectorXd& scale);
  static MetricSpec weighted_hamming(Eigen::VectorXd alpha);
  static MetricSpec weighted_sup(Eigen::VectorXd weights);

  Kind kind() const { return kind_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    if (x.size() != y.size()) throw DimensionError("metric arguments differ in dimension");
    if (kind_ != Kind::euclidean && weights_.size() != x.size())
      throw DimensionError("metric weights do not match the state dimension");
    switch (kind_) {
      case Kind::euclidean:
        return (x - y).norm();
      case Kind::weighted_sobolev:
        return std::sqrt((weights_.array() * (x - y).array().square()).sum());
      case Kind::weighted_hamming:
        return (weights_.array() * (x.array() != y.array()).template cast<double>()).sum();
      case Kind::weighted_sup:
        return (weights_.array() * (x - y).array().abs()).maxCoeff();
    }
    return 0.0;
  }

 private:
  MetricSpec(Kind kind, Eigen::VectorXd weights) : kind_(kind), weights_(std::move(weights)) {}
  Kind kind_;
  Eigen::VectorXd weights_;
};

/// sum_i |p_i - q_i| for two probability-like vectors of equal length.
template <typename A, typename B>
auto tv_distance(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& q) {
  if (p.size() != q.size()) throw DimensionError("total variation of vectors with different supports");
  return (p - q).cwiseAbs().sum();
}

double tv_categorical(const Categorical& p, const Categorical& q);

/// Total variation between atomic measures, matching atoms by exact equality.
double tv_atomic(const AtomicMeasure& p, const AtomicMeasure& q);

struct BlOptions {
  Eigen::Index atom_cap = 2000;  ///< combined atoms allowed into one LP
  bool subsample = false;        ///< above the cap: subsample (true) or throw (false)
  std::uint64_t seed = 0;        ///< stream seed of the stratified subsampler
};

struct BlResult {
  double value = 0.0;
  double duality_gap = 0.0;
  Eigen::Index atoms_used = 0;
  bool subsampled = false;
};

/// Bounded-Lipschitz distance sup{ |p f - q f| : |f| <= 1, |f(u) - f(v)| <= d(u,v) }
/// between two atomic measures, solved exactly. With equal masses the
/// constraint set is the 1-Lipschitz functions for min(d, 2), so the value is
/// computed as the optimal transport cost under that truncated metric.
BlResult bl_atomic_detailed(const AtomicMeasure& p, const AtomicMeasure& q, const MetricSpec& metric,
                            const BlOptions& options = {});

inline double bl_atomic(const AtomicMeasure& p, const AtomicMeasure& q, const MetricSpec& metric,
                        const BlOptions& options = {}) {
  return bl_atomic_detailed(p, q, metric, options).value;
}

/// Systematic (stratified) resampling of `m` equally weighted atoms from `p`,
/// with duplicates merged. Driven by the single uniform `u` in [0, 1).
AtomicMeasure stratified_subsample(const AtomicMeasure& p, Eigen::Index m, double u);

/// Hellinger affinity of N(a, 1) and N(b, 1).
template <typename Scalar>
Scalar hellinger_gaussian_affinity(Scalar a, Scalar b) {
  using std::exp;
  return exp(-(b - a) * (b - a) / Scalar(8));
}

/// Upper bound on the TV distance between (a_n + xi_n) and (b_n + xi_n) for
/// i.i.d. standard normal xi: min(2, sqrt(sum gaps^2)).
double gaussian_seq_tv_bound(std::span<const double> gaps);

/// min(2, sqrt(8 (1 - prod H_k))) for per-coordinate Hellinger affinities H_k.
double product_tv_bound(std::span<const double> affinities);

/// TV between the joint laws marginal(x) K(x, y) and marginal(x) K2(x, y),
/// evaluated through the conditionals: sum_x marginal(x) |K(x,.) - K2(x,.)|.
double tv_joint_from_conditionals(const Categorical& marginal, const Eigen::MatrixXd& K, const Eigen::MatrixXd& K2);

/// Throws unless every row of `m` is a probability vector within `tol`.
void require_row_stochastic(const Eigen::MatrixXd& m, double tol, const char* what);

}  // namespace ergolab
