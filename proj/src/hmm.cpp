#include "ergolab/hmm.hpp"

#include <algorithm>
#include <string>

#include "ergolab/rng.hpp"

namespace ergolab {

namespace {

FiniteChain build_joint(const Eigen::MatrixXd& P0, const Eigen::MatrixXd& Q, const std::vector<double>& g) {
  const auto m = P0.rows(), l = Q.rows();
  Eigen::MatrixXd P(m * l, m * l);
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < l; ++y)
      for (Eigen::Index x2 = 0; x2 < m; ++x2)
        for (Eigen::Index y2 = 0; y2 < l; ++y2)
          P(x * l + y, x2 * l + y2) = g[static_cast<std::size_t>(((x * l + y) * m + x2) * l + y2)] * P0(x, x2) * Q(y, y2);
  return FiniteChain(std::move(P));
}

}  // namespace

FiniteHMM::FiniteHMM(Eigen::MatrixXd P0, Eigen::MatrixXd Q, std::vector<double> g)
    : P0_(std::move(P0)), Q_(std::move(Q)), g_(std::move(g)) {
  if (P0_.rows() == 0 || P0_.rows() != P0_.cols() || Q_.rows() == 0 || Q_.rows() != Q_.cols())
    throw DimensionError("FiniteHMM: P0 and Q must be square and nonempty");
  require_row_stochastic(P0_, kProbabilityTol, "FiniteHMM P0");
  require_row_stochastic(Q_, kProbabilityTol, "FiniteHMM Q");
  const auto m = P0_.rows(), l = Q_.rows();
  if (static_cast<Eigen::Index>(g_.size()) != m * l * m * l)
    throw DimensionError("FiniteHMM: g must have m*l*m*l entries");
  if (std::any_of(g_.begin(), g_.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); }))
    throw InvalidArgument("FiniteHMM: g must be finite and nonnegative");

  // Normalize g so that every row of the joint kernel carries unit mass.
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < l; ++y) {
      double z = 0.0;
      for (Eigen::Index x2 = 0; x2 < m; ++x2)
        for (Eigen::Index y2 = 0; y2 < l; ++y2)
          z += g_[static_cast<std::size_t>(((x * l + y) * m + x2) * l + y2)] * P0_(x, x2) * Q_(y, y2);
      if (!(z > 0.0))
        throw DegenerateModel("FiniteHMM: joint kernel row (" + std::to_string(x) + "," + std::to_string(y) +
                              ") has zero mass");
      for (Eigen::Index x2 = 0; x2 < m; ++x2)
        for (Eigen::Index y2 = 0; y2 < l; ++y2) g_[static_cast<std::size_t>(((x * l + y) * m + x2) * l + y2)] /= z;
    }
  min_g_ = *std::min_element(g_.begin(), g_.end());
  joint_ = build_joint(P0_, Q_, g_);
}

FiniteHMM FiniteHMM::hidden_markov(Eigen::MatrixXd P0, Eigen::MatrixXd emission) {
  if (emission.rows() != P0.rows()) throw DimensionError("FiniteHMM: emission needs one row per hidden state");
  require_row_stochastic(emission, kProbabilityTol, "FiniteHMM emission");
  const auto m = P0.rows(), l = emission.cols();
  std::vector<double> g(static_cast<std::size_t>(m * l * m * l));
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < l; ++y)
      for (Eigen::Index x2 = 0; x2 < m; ++x2)
        for (Eigen::Index y2 = 0; y2 < l; ++y2)
          g[static_cast<std::size_t>(((x * l + y) * m + x2) * l + y2)] = static_cast<double>(l) * emission(x2, y2);
  FiniteHMM hmm(std::move(P0), Eigen::MatrixXd::Constant(l, l, 1.0 / static_cast<double>(l)), std::move(g));
  hmm.emission_ = std::move(emission);
  return hmm;
}

const Categorical& FiniteHMM::joint_stationary() const {
  if (!joint_stationary_) joint_stationary_ = stationary(joint_);
  return *joint_stationary_;
}

Categorical FiniteHMM::hidden_stationary() const {
  const auto& joint = joint_stationary().probs();
  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(hidden_states());
  for (int x = 0; x < hidden_states(); ++x)
    for (int y = 0; y < symbols(); ++y) marginal(x) += joint(x * symbols() + y);
  return Categorical::normalized(std::move(marginal));
}

HmmPath simulate(const FiniteHMM& hmm, int T, std::uint64_t seed, std::uint64_t replica) {
  if (T < 1) throw InvalidArgument("simulate: T must be >= 1");
  Stream stream(seed, replica, "hmm-simulate");
  const auto& P = hmm.joint_chain().P();
  const int l = hmm.symbols();
  HmmPath path;
  path.hidden.reserve(static_cast<std::size_t>(T) + 1);
  path.observed.reserve(static_cast<std::size_t>(T) + 1);
  int state = sample_index(hmm.joint_stationary().probs(), stream.uniform());
  for (int t = 0; t <= T; ++t) {
    if (t > 0) state = sample_index(P.row(state), stream.uniform());
    path.hidden.push_back(state / l);
    path.observed.push_back(state % l);
  }
  return path;
}

}  // namespace ergolab
