#include "ergolab/conditional.hpp"

#include <algorithm>
#include <string>

namespace ergolab {

namespace {

// Kernel of the step (t-1 -> t) restricted to the hidden coordinate; the Q
// factor is constant in (z, z') and dropped.
Eigen::MatrixXd step_kernel(const FiniteHMM& hmm, int y_prev, int y_next) {
  const int m = hmm.hidden_states();
  Eigen::MatrixXd K(m, m);
  for (int z = 0; z < m; ++z)
    for (int z2 = 0; z2 < m; ++z2) K(z, z2) = hmm.P0()(z, z2) * hmm.g(z, y_prev, z2, y_next);
  return K;
}

void check_margin(const ConditionalChain& chain, int n, int margin) {
  if (n < 0 || n > chain.horizon() - margin)
    throw InvalidArgument("conditional lag " + std::to_string(n) + " exceeds window " +
                          std::to_string(chain.horizon()) + " minus margin " + std::to_string(margin));
}

}  // namespace

Eigen::MatrixXd ConditionalChain::product(int n) const {
  const auto m = initial.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m, m);
  for (int t = 0; t < n; ++t) out = out * transitions[static_cast<std::size_t>(t)];
  return out;
}

ConditionalChain conditional_transitions(const FiniteHMM& hmm, std::span<const int> y) {
  if (y.size() < 2) throw InvalidArgument("conditional_transitions: need at least two observations");
  const int m = hmm.hidden_states();
  for (int s : y)
    if (s < 0 || s >= hmm.symbols()) throw InvalidArgument("conditional_transitions: symbol out of range");
  const int T = static_cast<int>(y.size()) - 1;

  ConditionalChain chain;
  chain.transitions.resize(static_cast<std::size_t>(T));
  // Backward variables, rescaled by their maximum at every step.
  Eigen::VectorXd beta = Eigen::VectorXd::Ones(m);
  for (int t = T; t >= 1; --t) {
    const Eigen::MatrixXd K = step_kernel(hmm, y[static_cast<std::size_t>(t) - 1], y[static_cast<std::size_t>(t)]);
    Eigen::MatrixXd M = K * beta.asDiagonal();
    const Eigen::VectorXd rows = M.rowwise().sum();
    if ((rows.array() <= 0.0).any())
      throw DegenerateModel("conditional_transitions: zero backward variable at t = " + std::to_string(t - 1) +
                            " (observations exclude a hidden state with certainty)");
    chain.transitions[static_cast<std::size_t>(t) - 1] = rows.asDiagonal().inverse() * M;
    beta = rows / rows.maxCoeff();
  }

  const auto& joint = hmm.joint_stationary().probs();
  Eigen::VectorXd w(m);
  for (int z = 0; z < m; ++z) w(z) = joint(z * hmm.symbols() + y[0]) * beta(z);
  chain.initial = Categorical::normalized(std::move(w));
  return chain;
}

double conditional_tv(const ConditionalChain& chain, int z0, int z0b, int n, int margin) {
  check_margin(chain, n, margin);
  const Eigen::MatrixXd prod = chain.product(n);
  return std::min(kTvMax, tv_distance(prod.row(z0), prod.row(z0b)));
}

double conditional_tv(const FiniteHMM& hmm, std::span<const int> y, int z0, int z0b, int n) {
  const auto chain = conditional_transitions(hmm, y);
  return conditional_tv(chain, z0, z0b, n, default_margin(chain.horizon()));
}

double conditional_beta(const ConditionalChain& chain, int n, int margin) {
  check_margin(chain, n, margin);
  const Eigen::MatrixXd prod = chain.product(n);
  const Eigen::RowVectorXd mixture = chain.initial.probs().transpose() * prod;
  const Eigen::VectorXd row_tv = (prod.rowwise() - mixture).cwiseAbs().rowwise().sum();
  return chain.initial.probs().dot(row_tv);
}

double conditional_beta(const FiniteHMM& hmm, std::span<const int> y, int n) {
  const auto chain = conditional_transitions(hmm, y);
  return conditional_beta(chain, n, default_margin(chain.horizon()));
}

InheritanceTable inheritance_experiment(const FiniteHMM& hmm, int n_paths, int T, std::span<const int> lags,
                                        std::uint64_t seed) {
  if (n_paths < 1 || lags.empty()) throw InvalidArgument("inheritance_experiment: need paths and lags");
  const int m = hmm.hidden_states();
  const int margin = default_margin(T);
  InheritanceTable table;
  table.lags.assign(lags.begin(), lags.end());
  table.max_tv.assign(lags.size(), 0.0);
  table.mean_tv.assign(lags.size(), 0.0);
  table.per_path = Eigen::MatrixXd::Zero(n_paths, static_cast<Eigen::Index>(lags.size()));
  table.nondegenerate = hmm.nondegenerate();
  table.joint_beta = beta_mixing_coeff(hmm.joint_chain(), *std::max_element(lags.begin(), lags.end()));

  const int pairs = m * (m - 1);
  for (int p = 0; p < n_paths; ++p) {
    const HmmPath path = simulate(hmm, 2 * T, seed, static_cast<std::uint64_t>(p));
    const std::span<const int> obs(path.observed);
    const auto window = conditional_transitions(hmm, obs.first(static_cast<std::size_t>(T) + 1));
    const auto doubled = conditional_transitions(hmm, obs);
    for (std::size_t li = 0; li < lags.size(); ++li) {
      const int n = lags[li];
      check_margin(window, n, margin);
      const Eigen::MatrixXd prod = window.product(n);
      const Eigen::MatrixXd prod2 = doubled.product(n);
      double worst = 0.0, sum = 0.0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          if (a == b) continue;
          const double tv = std::min(kTvMax, tv_distance(prod.row(a), prod.row(b)));
          const double tv2 = std::min(kTvMax, tv_distance(prod2.row(a), prod2.row(b)));
          table.truncation_delta = std::max(table.truncation_delta, std::abs(tv - tv2));
          worst = std::max(worst, tv);
          sum += tv;
        }
      table.per_path(p, static_cast<Eigen::Index>(li)) = worst;
      table.max_tv[li] = std::max(table.max_tv[li], worst);
      table.mean_tv[li] += pairs > 0 ? sum / pairs / n_paths : 0.0;
    }
  }
  return table;
}

}  // namespace ergolab
