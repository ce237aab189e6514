#include "ergolab/models/delay.hpp"

#include <cmath>
#include <vector>

namespace ergolab {

namespace {

int whole_multiple(double span, double h, const char* what) {
  const auto n = static_cast<int>(std::lround(span / h));
  if (n < 1 || std::abs(n * h - span) > 1e-9 * std::max(1.0, span))
    throw InvalidArgument(std::string("delay: ") + what + " must be a positive multiple of h");
  return n;
}

}  // namespace

DelayModel::DelayModel(DelayParams params) : params_(params) {
  if (!(params_.h > 0.0)) throw InvalidArgument("delay: step h must be positive");
  if (!(params_.sigma0 > 0.0)) throw InvalidArgument("delay: sigma0 must be positive");
  if (!(params_.obs_variance > 0.0)) throw InvalidArgument("delay: observation variance must be positive");
  lag_steps_ = whole_multiple(params_.delay, params_.h, "delay r");
  sample_steps_ = whole_multiple(params_.delta, params_.h, "sampling interval");
}

State DelayModel::step_with(const State& window, const Eigen::VectorXd& noise) const {
  if (window.size() != state_dim()) throw DimensionError("delay: window has wrong length");
  if (noise.size() != sample_steps_) throw DimensionError("delay: one increment per Euler step required");
  const double a = params_.a, b = params_.b, h = params_.h;
  const double diffusion = params_.sigma0 * std::sqrt(h);
  // path[j] is the value at time t - r + j h.
  std::vector<double> path(window.data(), window.data() + window.size());
  path.reserve(path.size() + static_cast<std::size_t>(sample_steps_));
  for (int j = 0; j < sample_steps_; ++j) {
    const double now = path[static_cast<std::size_t>(lag_steps_ + j)];
    const double delayed = path[static_cast<std::size_t>(j)];
    const double next = now + (-a * now + b * std::sin(delayed)) * h + diffusion * noise(j);
    if (!(std::abs(next) <= params_.guard)) throw NumericalError("delay: path left the guard region");
    path.push_back(next);
  }
  return Eigen::Map<const Eigen::VectorXd>(path.data() + sample_steps_, state_dim());
}

State DelayModel::step(const State& window, Stream& noise) const {
  Eigen::VectorXd xi(sample_steps_);
  for (auto& v : xi) v = noise.normal();
  return step_with(window, xi);
}

Observation DelayModel::observation_mean(const State& window) const {
  return Observation::Constant(1, std::tanh(window(window.size() - 1)));
}

Observation DelayModel::observe(const State& window, Stream& noise) const {
  return Observation::Constant(1, std::tanh(window(window.size() - 1)) + std::sqrt(params_.obs_variance) * noise.normal());
}

double DelayModel::obs_log_density(const State& window, const Observation& y) const {
  const double r = y(0) - std::tanh(window(window.size() - 1));
  return -0.5 * r * r / params_.obs_variance - 0.5 * std::log(2.0 * M_PI * params_.obs_variance);
}

MetricSpec DelayModel::metric() const { return MetricSpec::weighted_sup(Eigen::VectorXd::Ones(state_dim())); }

State DelayModel::sample_stationary(Stream& noise) const {
  State x = State::Zero(state_dim());
  for (int n = 0; n < params_.burn_in; ++n) x = step(x, noise);
  return x;
}

std::optional<Eigen::MatrixXd> DelayModel::observation_covariance() const {
  return Eigen::MatrixXd::Constant(1, 1, params_.obs_variance);
}

}  // namespace ergolab
