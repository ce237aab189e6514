#pragma once

// Finite Markov chains, their projections, and exact probes of the local
// zero-two law, local mixing and absolute regularity.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "ergolab/measure.hpp"

namespace ergolab {

class FiniteChain {
 public:
  FiniteChain() = default;
  explicit FiniteChain(Eigen::MatrixXd P, std::optional<Categorical> stationary = std::nullopt);

  Eigen::Index n_states() const { return P_.rows(); }
  const Eigen::MatrixXd& P() const { return P_; }
  const std::optional<Categorical>& stationary_hint() const { return stationary_; }

  /// Row vector mu P^n.
  Eigen::RowVectorXd evolve(const Eigen::RowVectorXd& mu, int n) const;

 private:
  Eigen::MatrixXd P_;
  std::optional<Categorical> stationary_;
};

/// State -> symbol map.
class Projection {
 public:
  Projection() = default;
  Projection(std::vector<int> map, int alphabet_size);

  static Projection identity(Eigen::Index n);

  int operator()(Eigen::Index state) const { return map_[static_cast<std::size_t>(state)]; }
  int alphabet_size() const { return alphabet_size_; }
  Eigen::Index domain_size() const { return static_cast<Eigen::Index>(map_.size()); }
  bool injective() const;

 private:
  std::vector<int> map_;
  int alphabet_size_ = 1;
};

inline constexpr Eigen::Index kProductStateCap = 4096;
inline constexpr double kPathEnumerationCap = 2e5;

/// Independent coordinates; state index is mixed radix with coordinate 0 most significant.
class ProductChain {
 public:
  explicit ProductChain(std::vector<FiniteChain> components, Eigen::Index state_cap = kProductStateCap);

  const std::vector<FiniteChain>& components() const { return components_; }
  Eigen::Index n_states() const { return n_states_; }

  std::vector<int> decode(Eigen::Index state) const;
  Eigen::Index encode(const std::vector<int>& coords) const;

  /// Transition matrix on the product space, built on first use.
  const FiniteChain& chain() const;

  /// Projection onto the listed coordinates (empty set -> one symbol).
  Projection coordinate_projection(const std::vector<int>& coords) const;

 private:
  std::vector<FiniteChain> components_;
  Eigen::Index n_states_ = 1;
  mutable std::optional<FiniteChain> materialized_;
};

/// Law of a projected path segment, keyed by symbol string.
using PathLaw = std::map<std::vector<int>, double>;

/// Stationary law by a normalized linear solve; requires exactly one closed class.
Categorical stationary(const FiniteChain& chain);

/// Closed communicating classes of the transition graph.
std::vector<std::vector<Eigen::Index>> closed_classes(const Eigen::MatrixXd& P);

PathLaw projected_path_law(const FiniteChain& chain, const Categorical& init, const Projection& proj, int n,
                           int k);

/// TV between the projected path laws of (X_n..X_{n+k}) from the point starts x and x2.
double local_path_tv(const FiniteChain& chain, Eigen::Index x, Eigen::Index x2, const Projection& proj, int n, int k);

/// local_path_tv with k grown from 0 until successive values differ by less than `tol` (or k_max).
double local_path_tv_converged(const FiniteChain& chain, Eigen::Index x, Eigen::Index x2, const Projection& proj,
                               int n, int k_max, double tol = 1e-6);

/// beta(n) = sum_x lambda(x) |delta_x P^n - lambda|.
double beta_mixing_coeff(const FiniteChain& chain, int n);

struct ZeroTwoReport {
  bool locally_irreducible = false;
  std::optional<int> witness_n;     ///< largest per-pair first n reaching 2 - alpha
  std::vector<double> tv_trace;     ///< max over ordered pairs of local_path_tv, n = 0..n_max
  std::vector<int> pair_witness;    ///< first n per ordered pair (x, x2), -1 if none; row-major
};

ZeroTwoReport zero_two_probe(const FiniteChain& chain, const Projection& proj, int n_max, int k_max, double alpha);

struct LocalMixingReport {
  ZeroTwoReport local;
  /// Max-pair TV of the full product chain (injective projection, window k = 0), n = 0..n_max.
  std::vector<double> full_tv_trace;
  /// |delta_{1..1} P^n - lambda| on the product of the first d coordinates, d = 1..D, at n = contrast_n.
  std::vector<double> dimension_contrast;
  int contrast_n = 0;
};

LocalMixingReport local_mixing_probe(const ProductChain& product, const std::vector<int>& coords, int n_max,
                                     int k_max, double alpha = 0.5);

}  // namespace ergolab
