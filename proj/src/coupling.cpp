#include "ergolab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergolab {

CoupledPair coupling_run(const StateSpaceModel& model, const State& x0, const State& x0b, int T, CouplingKind kind,
                         std::uint64_t seed, std::uint64_t replica, bool keep_states) {
  if (T < 0) throw InvalidArgument("coupling_run: negative horizon");
  if (x0.size() != model.state_dim() || x0b.size() != model.state_dim())
    throw DimensionError("coupling_run: initial states do not match the model");
  const MetricSpec d = model.metric(), dt = model.strong_metric();
  const Stream base(seed, replica, "coupling");
  CoupledPair out;
  State x = x0, xb = x0b;
  auto record = [&] {
    out.d.push_back(d(x, xb));
    out.d_tilde.push_back(dt(x, xb));
    if (keep_states) {
      out.first.push_back(x);
      out.second.push_back(xb);
    }
  };
  record();
  for (int n = 0; n < T; ++n) {
    const auto id = static_cast<std::uint64_t>(n);
    if (kind == CouplingKind::synchronous) {
      Stream a = base.fork(id), b = a;
      x = model.step(x, a);
      xb = model.step(xb, b);
    } else {
      Stream a = base.fork(2 * id), b = base.fork(2 * id + 1);
      x = model.step(x, a);
      xb = model.step(xb, b);
    }
    record();
  }
  return out;
}

MonotoneRun monotone_coupling_run(const SpinModel& model, const State& x0, const State& x0b, int T, std::uint64_t seed,
                                  std::uint64_t replica, bool strict) {
  if (x0.size() != model.state_dim() || x0b.size() != model.state_dim())
    throw DimensionError("monotone_coupling_run: configurations do not match the ring");
  if ((x0.array() > x0b.array()).any()) throw InvalidArgument("monotone_coupling_run: need x0 <= x0b sitewise");
  const MetricSpec d = model.metric();
  const Stream base(seed, replica, "coupling");
  MonotoneRun run;
  State x = x0, xb = x0b;
  auto record = [&] {
    run.pair.d.push_back(d(x, xb));
    run.pair.d_tilde.push_back(run.pair.d.back());
    run.disagreements.push_back(static_cast<int>((x.array() != xb.array()).count()));
  };
  record();
  for (int n = 0; n < T; ++n) {
    Stream clock = base.fork(static_cast<std::uint64_t>(n));
    for (const auto& e : model.draw_events(clock)) {
      model.apply(x, e);
      model.apply(xb, e);
      ++run.events;
      if (x(e.site) > xb(e.site)) {
        ++run.order_violations;
        if (strict) throw std::logic_error("monotone coupling lost the order at site " + std::to_string(e.site));
      }
    }
    record();
  }
  return run;
}

Interval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials) throw InvalidArgument("wilson_interval: bad counts");
  const double n = trials, p = successes / n, z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

double tail_half_sum(const std::vector<double>& d_tilde) {
  const std::size_t T = d_tilde.size() - 1;
  double s = 0.0;
  for (std::size_t n = T / 2 + 1; n <= T; ++n) s += d_tilde[n] * d_tilde[n];
  return s;
}

}  // namespace

CouplingReport alpha_for_pair(const StateSpaceModel& model, const std::pair<State, State>& pair, int horizon,
                              const AlphaOptions& options, std::uint64_t seed, std::uint64_t pair_index) {
  CouplingReport report;
  report.replicas = options.replicas;
  for (int r = 0; r < options.replicas; ++r) {
    const auto replica = (pair_index << 32) | static_cast<std::uint64_t>(r);
    const auto run = coupling_run(model, pair.first, pair.second, horizon, options.kind, seed, replica);
    report.tail_sums.push_back(tail_half_sum(run.d_tilde));
    if (report.tail_sums.back() < options.epsilon) ++report.successes;
  }
  report.alpha_hat = static_cast<double>(report.successes) / options.replicas;
  report.wilson = wilson_interval(report.successes, options.replicas);
  return report;
}

AlphaSummary alpha_estimate(const StateSpaceModel& model, std::span<const std::pair<State, State>> init_pairs,
                            const AlphaOptions& options, std::uint64_t seed) {
  if (init_pairs.empty()) throw InvalidArgument("alpha_estimate: no initial pairs");
  if (options.replicas < 1 || options.horizon < 2 || !(options.epsilon > 0.0))
    throw InvalidArgument("alpha_estimate: need replicas >= 1, horizon >= 2 and epsilon > 0");
  AlphaSummary summary;
  summary.alpha_min = 2.0;
  double doubled_min = 2.0;
  for (std::size_t i = 0; i < init_pairs.size(); ++i) {
    summary.per_pair.push_back(alpha_for_pair(model, init_pairs[i], options.horizon, options, seed, i));
    if (summary.per_pair.back().alpha_hat < summary.alpha_min) {
      summary.alpha_min = summary.per_pair.back().alpha_hat;
      summary.worst_pair = i;
    }
    if (options.doubled_horizon_check)
      doubled_min =
          std::min(doubled_min, alpha_for_pair(model, init_pairs[i], 2 * options.horizon, options, seed, i).alpha_hat);
  }
  if (options.doubled_horizon_check) summary.alpha_min_doubled = doubled_min;
  return summary;
}

double hellinger_gap_gaussian(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cov) {
  if (a.size() != b.size() || cov.rows() != a.size() || cov.cols() != a.size())
    throw DimensionError("hellinger_gap_gaussian: shapes differ");
  const Eigen::VectorXd delta = a - b;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidArgument("hellinger_gap_gaussian: covariance not positive definite");
  const double q = delta.dot(llt.solve(delta));
  return 2.0 - 2.0 * std::exp(-q / 8.0);
}

HellingerCheck hellinger_lipschitz_check(const StateSpaceModel& model, std::span<const std::pair<State, State>> pairs,
                                         const MetricSpec& metric) {
  const auto cov = model.observation_covariance();
  if (!cov) throw InvalidArgument("hellinger_lipschitz_check: " + model.name() + " has no Gaussian observation model");
  HellingerCheck check;
  for (const auto& [x, xb] : pairs) {
    const double gap = hellinger_gap_gaussian(model.observation_mean(x), model.observation_mean(xb), *cov);
    check.max_gap = std::max(check.max_gap, gap);
    const double dist = metric(x, xb);
    if (dist == 0.0) {
      if (gap != 0.0) throw InvalidArgument("hellinger_lipschitz_check: distinct observation laws at distance 0");
      continue;
    }
    check.ratios.push_back(gap / (dist * dist));
    check.max_ratio = std::max(check.max_ratio, check.ratios.back());
  }
  check.C_hat = check.max_ratio;
  return check;
}

namespace {

double fitted_rate(const Eigen::VectorXd& mean, const std::vector<double>& times, int points) {
  // Least squares slope of log mean against time.
  double st = 0.0, sy = 0.0;
  for (int i = 0; i < points; ++i) {
    st += times[static_cast<std::size_t>(i)];
    sy += std::log(mean(i));
  }
  const double tbar = st / points, ybar = sy / points;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < points; ++i) {
    const double dt = times[static_cast<std::size_t>(i)] - tbar;
    num += dt * (std::log(mean(i)) - ybar);
    den += dt * dt;
  }
  return -num / den;
}

}  // namespace

DecayFit disagreement_decay_fit(const SpinModel& model, int replicas, int T, std::uint64_t seed, int bootstrap,
                                double level) {
  if (replicas < 2 || T < 2 || bootstrap < 10 || !(level > 0.0 && level < 1.0))
    throw InvalidArgument("disagreement_decay_fit: need replicas >= 2, T >= 2, bootstrap >= 10, level in (0, 1)");
  const Eigen::Index L = model.state_dim();
  Eigen::MatrixXd counts(replicas, T + 1);
  for (int r = 0; r < replicas; ++r) {
    const auto run = monotone_coupling_run(model, State::Zero(L), State::Ones(L), T, seed, static_cast<std::uint64_t>(r));
    for (int n = 0; n <= T; ++n) counts(r, n) = run.disagreements[static_cast<std::size_t>(n)];
  }
  DecayFit fit;
  const Eigen::VectorXd mean = counts.colwise().mean().transpose();
  for (int n = 0; n <= T; ++n) {
    fit.times.push_back(n * model.params().delta);
    fit.mean_disagreement.push_back(mean(n));
  }
  while (fit.fit_points <= T && mean(fit.fit_points) >= 1.0) ++fit.fit_points;
  if (fit.fit_points < 3) throw InvalidArgument("disagreement_decay_fit: too few points above one disagreement");
  fit.gamma_hat = fitted_rate(mean, fit.times, fit.fit_points);

  Stream stream(seed, 0, "bootstrap");
  std::vector<double> rates;
  for (int b = 0; b < bootstrap; ++b) {
    Eigen::VectorXd resampled = Eigen::VectorXd::Zero(T + 1);
    for (int r = 0; r < replicas; ++r)
      resampled += counts.row(static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(replicas)))).transpose();
    resampled /= replicas;
    if ((resampled.head(fit.fit_points).array() <= 0.0).any()) continue;
    rates.push_back(fitted_rate(resampled, fit.times, fit.fit_points));
  }
  std::sort(rates.begin(), rates.end());
  const auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::clamp(q * (rates.size() - 1.0), 0.0, rates.size() - 1.0));
    return rates[idx];
  };
  fit.ci = {pick((1.0 - level) / 2.0), pick((1.0 + level) / 2.0)};
  return fit;
}

}  // namespace ergolab
