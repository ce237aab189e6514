#include "ergolab/models/heat.hpp"

#include <cmath>

namespace ergolab {

namespace {

double gaussian_log_density(const Eigen::VectorXd& residual, double variance) {
  return -0.5 * residual.squaredNorm() / variance -
         0.5 * static_cast<double>(residual.size()) * std::log(2.0 * M_PI * variance);
}

}  // namespace

HeatModel::HeatModel(HeatParams params) : params_(std::move(params)) {
  const int K = params_.modes;
  if (K < 1) throw InvalidArgument("heat: need at least one mode");
  if (!(params_.delta > 0.0)) throw InvalidArgument("heat: delta must be positive");
  if (!(params_.obs_variance > 0.0)) throw InvalidArgument("heat: observation variance must be positive");
  if (params_.obs_points.empty()) throw InvalidArgument("heat: need at least one observation point");
  for (double z : params_.obs_points)
    if (!(z > 0.0 && z < 1.0)) throw InvalidArgument("heat: observation points must lie in (0, 1)");
  if (params_.sigma.size() == 0) {
    sigma_.resize(K);
    for (int k = 1; k <= K; ++k) sigma_(k - 1) = params_.sigma_scale / k;
  } else {
    if (params_.sigma.size() != K) throw DimensionError("heat: sigma needs one entry per mode");
    sigma_ = params_.sigma;
  }
  if ((sigma_.array() <= 0.0).any()) throw InvalidArgument("heat: every sigma_k must be positive");
  rates_.resize(K);
  for (int k = 1; k <= K; ++k) rates_(k - 1) = M_PI * M_PI * k * k;
  obs_matrix_.resize(static_cast<Eigen::Index>(params_.obs_points.size()), K);
  for (std::size_t i = 0; i < params_.obs_points.size(); ++i)
    for (int k = 1; k <= K; ++k)
      obs_matrix_(static_cast<Eigen::Index>(i), k - 1) = std::sqrt(2.0) * std::sin(M_PI * k * params_.obs_points[i]);
}

State HeatModel::step_with(const State& x, const Eigen::VectorXd& noise, double dt) const {
  if (noise.size() != state_dim() || x.size() != state_dim()) throw DimensionError("heat_step: wrong vector length");
  const Eigen::ArrayXd decay = (-rates_.array() * dt).exp();
  const Eigen::ArrayXd spread =
      (sigma_.array().square() * (1.0 - (-2.0 * rates_.array() * dt).exp()) / (2.0 * rates_.array())).sqrt();
  return decay * x.array() + spread * noise.array();
}

State HeatModel::step_with(const State& x, const Eigen::VectorXd& noise) const {
  return step_with(x, noise, params_.delta);
}

State HeatModel::step(const State& x, Stream& noise) const {
  Eigen::VectorXd xi(state_dim());
  for (auto& v : xi) v = noise.normal();
  return step_with(x, xi);
}

Observation HeatModel::observation_mean(const State& x) const { return obs_matrix_ * x; }

Observation HeatModel::observe(const State& x, Stream& noise) const {
  Observation y = observation_mean(x);
  const double sd = std::sqrt(params_.obs_variance);
  for (auto& v : y) v += sd * noise.normal();
  return y;
}

double HeatModel::obs_log_density(const State& x, const Observation& y) const {
  return gaussian_log_density(y - observation_mean(x), params_.obs_variance);
}

MetricSpec HeatModel::metric() const { return MetricSpec::sobolev(0.0, rates_.cwiseSqrt()); }

MetricSpec HeatModel::strong_metric() const { return MetricSpec::sobolev(1.0, rates_.cwiseSqrt()); }

Eigen::VectorXd HeatModel::stationary_variance() const {
  return sigma_.array().square() / (2.0 * rates_.array());
}

State HeatModel::sample_stationary(Stream& noise) const {
  const Eigen::VectorXd sd = stationary_variance().cwiseSqrt();
  State x(state_dim());
  for (Eigen::Index k = 0; k < state_dim(); ++k) x(k) = sd(k) * noise.normal();
  return x;
}

std::optional<Eigen::MatrixXd> HeatModel::observation_covariance() const {
  const auto n = static_cast<Eigen::Index>(params_.obs_points.size());
  return Eigen::MatrixXd(params_.obs_variance * Eigen::MatrixXd::Identity(n, n));
}

double HeatModel::hellinger_constant() const {
  return static_cast<double>(params_.obs_points.size()) / (12.0 * params_.obs_variance);
}

}  // namespace ergolab
