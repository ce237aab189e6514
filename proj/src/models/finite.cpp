#include "ergolab/models/finite.hpp"

#include <cmath>

namespace ergolab {

FiniteStateModel::FiniteStateModel(Eigen::MatrixXd P0, std::optional<Eigen::MatrixXd> emission,
                                   std::optional<Categorical> stationary_law)
    : P0_(std::move(P0)) {
  if (P0_.rows() != P0_.cols() || P0_.rows() == 0) throw DimensionError("finite model: P0 must be square");
  require_row_stochastic(P0_, kProbabilityTol, "finite model P0");
  emission_ = emission ? std::move(*emission) : Eigen::MatrixXd::Ones(P0_.rows(), 1);
  if (emission_.rows() != P0_.rows()) throw DimensionError("finite model: one emission row per hidden state");
  require_row_stochastic(emission_, kProbabilityTol, "finite model emission");
  stationary_ = stationary_law ? std::move(*stationary_law) : stationary(FiniteChain(P0_));
}

FiniteStateModel::FiniteStateModel(const FiniteHMM& hmm)
    : FiniteStateModel(hmm.P0(),
                       hmm.emission() ? *hmm.emission()
                                      : throw InvalidArgument("finite model: HMM is not in hidden-Markov form"),
                       hmm.hidden_stationary()) {}

int FiniteStateModel::index(const State& x) const {
  if (x.size() != 1) throw DimensionError("finite model: state is a single index");
  const auto i = static_cast<int>(std::lround(x(0)));
  if (i < 0 || i >= states() || x(0) != i) throw InvalidArgument("finite model: state is not a valid index");
  return i;
}

State FiniteStateModel::step(const State& x, Stream& noise) const {
  return State::Constant(1, sample_index(P0_.row(index(x)), noise.uniform()));
}

Observation FiniteStateModel::observe(const State& x, Stream& noise) const {
  return Observation::Constant(1, sample_index(emission_.row(index(x)), noise.uniform()));
}

double FiniteStateModel::obs_log_density(const State& x, const Observation& y) const {
  const auto symbol = static_cast<Eigen::Index>(y(0));
  if (y.size() != 1 || symbol < 0 || symbol >= emission_.cols() || y(0) != static_cast<double>(symbol))
    throw InvalidArgument("finite model: observation is not a valid symbol");
  return std::log(emission_(index(x), symbol));
}

MetricSpec FiniteStateModel::metric() const { return MetricSpec::weighted_hamming(Eigen::VectorXd::Ones(1)); }

State FiniteStateModel::sample_stationary(Stream& noise) const {
  return State::Constant(1, sample_index(stationary_.probs(), noise.uniform()));
}

Categorical FiniteStateModel::histogram(const AtomicMeasure& cloud) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(states());
  for (Eigen::Index i = 0; i < cloud.size(); ++i) h(index(cloud.atoms().col(i))) += cloud.weights()(i);
  return Categorical::normalized(std::move(h));
}

}  // namespace ergolab
