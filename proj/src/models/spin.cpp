#include "ergolab/models/spin.hpp"

#include <cmath>

namespace ergolab {

namespace {

int spin(int bit) { return 2 * bit - 1; }

}  // namespace

SpinModel::SpinModel(SpinParams params) : params_(params) {
  if (params_.sites < 3) throw InvalidArgument("spin: ring needs at least 3 sites");
  if (!(params_.beta >= 0.0)) throw InvalidArgument("spin: beta must be nonnegative");
  if (!(params_.delta > 0.0)) throw InvalidArgument("spin: bin width must be positive");
  if (!(params_.c0 > 0.0)) throw InvalidArgument("spin: baseline intensity c0 must be positive");
  if (!(params_.alpha0 > 0.0) || !(params_.alpha_decay > 0.0 && params_.alpha_decay <= 1.0))
    throw InvalidArgument("spin: need alpha0 > 0 and alpha_decay in (0, 1]");
  const int L = params_.sites;
  alpha_.resize(L);
  for (int i = 0; i < L; ++i) alpha_(i) = params_.alpha0 * std::pow(params_.alpha_decay, std::min(i, L - i));

  checks_.bounded = true;
  checks_.attractive = true;
  checks_.coupling_compatible = true;
  for (int l = 0; l < 2; ++l)
    for (int s = 0; s < 2; ++s)
      for (int r = 0; r < 2; ++r) {
        const double c = rate(l, s, r), c_flipped = rate(l, 1 - s, r);
        if (!(c > 0.0 && c <= 1.0)) checks_.bounded = false;
        // Ising weight ratio pi(x^i) / pi(x) = exp(-2 beta s_i (s_l + s_r)).
        const double ratio = std::exp(-2.0 * params_.beta * spin(s) * (spin(l) + spin(r)));
        checks_.max_detailed_balance_error =
            std::max(checks_.max_detailed_balance_error, std::abs(c - c_flipped * ratio) / c);
        for (int l2 = l; l2 < 2; ++l2)
          for (int r2 = r; r2 < 2; ++r2) {
            const double up = rate(l, 0, r), up2 = rate(l2, 0, r2);
            const double down = rate(l, 1, r), down2 = rate(l2, 1, r2);
            if (up > up2 || down < down2) checks_.attractive = false;
            if (up + down2 > 1.0 + 1e-15) checks_.coupling_compatible = false;
          }
      }
  if (!checks_.bounded || !checks_.attractive || !checks_.coupling_compatible ||
      checks_.max_detailed_balance_error > 1e-12)
    throw InvalidArgument("spin: flip rates fail the reversibility / attractiveness checks");
}

double SpinModel::rate(int left, int self, int right) const {
  return 1.0 / (1.0 + std::exp(2.0 * params_.beta * spin(self) * (spin(left) + spin(right))));
}

double SpinModel::rate(const State& x, int i) const {
  const int L = params_.sites;
  return rate(static_cast<int>(x((i + L - 1) % L)), static_cast<int>(x(i)), static_cast<int>(x((i + 1) % L)));
}

std::vector<SpinEvent> SpinModel::draw_events(Stream& noise) const {
  std::vector<SpinEvent> events;
  const double total = params_.sites;
  for (double t = noise.exponential(total); t < params_.delta; t += noise.exponential(total)) {
    const int site = static_cast<int>(noise.below(static_cast<std::uint64_t>(params_.sites)));
    events.push_back({site, noise.uniform()});
  }
  return events;
}

bool SpinModel::apply(State& x, const SpinEvent& e) const {
  const double c = rate(x, e.site);
  if (x(e.site) == 0.0) {
    if (e.u < c) return x(e.site) = 1.0, true;
  } else if (e.u > 1.0 - c) {
    return x(e.site) = 0.0, true;
  }
  return false;
}

State SpinModel::step(const State& x, Stream& noise) const {
  if (x.size() != state_dim()) throw DimensionError("spin: configuration has wrong length");
  State next = x;
  for (const auto& e : draw_events(noise)) apply(next, e);
  return next;
}

double SpinModel::intensity(const State& x) const { return params_.c0 + alpha_.dot(x); }

Observation SpinModel::observation_mean(const State& x) const {
  return Observation::Constant(1, params_.delta * intensity(x));
}

Observation SpinModel::observe(const State& x, Stream& noise) const {
  return Observation::Constant(1, static_cast<double>(noise.poisson(params_.delta * intensity(x))));
}

double SpinModel::obs_log_density(const State& x, const Observation& y) const {
  const double mean = params_.delta * intensity(x);
  const double k = y(0);
  if (k < 0.0 || k != std::floor(k)) return -std::numeric_limits<double>::infinity();
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

MetricSpec SpinModel::metric() const { return MetricSpec::weighted_hamming(alpha_); }

double SpinModel::gibbs_probability(const State& x) const {
  const int L = params_.sites;
  const double b = params_.beta;
  double energy = 0.0;
  for (int i = 0; i < L; ++i) energy += spin(static_cast<int>(x(i))) * spin(static_cast<int>(x((i + 1) % L)));
  // Z = (2 cosh b)^L + (2 sinh b)^L, evaluated relative to (2 cosh b)^L.
  const double log_z = L * std::log(2.0 * std::cosh(b)) + std::log1p(std::pow(std::tanh(b), L));
  return std::exp(b * energy - log_z);
}

State SpinModel::sample_stationary(Stream& noise) const {
  // Sequential exact sampling along the ring: site 0 is uniform by spin-flip
  // symmetry; site j given site j-1 and site 0 uses T^(L-j) normalized by its
  // leading eigenvalue, (1 + s s' tanh(b)^m) / 2.
  const int L = params_.sites;
  const double b = params_.beta, t = std::tanh(b);
  State x(L);
  x(0) = noise.uniform() < 0.5 ? 0.0 : 1.0;
  const int s0 = spin(static_cast<int>(x(0)));
  for (int j = 1; j < L; ++j) {
    const int prev = spin(static_cast<int>(x(j - 1)));
    const double tail = std::pow(t, L - j);
    const double w_up = std::exp(b * prev) * (1.0 + s0 * tail);
    const double w_down = std::exp(-b * prev) * (1.0 - s0 * tail);
    x(j) = noise.uniform() * (w_up + w_down) < w_up ? 1.0 : 0.0;
  }
  return x;
}

}  // namespace ergolab
