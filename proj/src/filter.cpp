#include "ergolab/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace ergolab {

namespace {

void check_symbol(const FiniteHMM& hmm, int y) {
  if (y < 0 || y >= hmm.symbols()) throw InvalidArgument("observation symbol out of range");
}

void check_prior(const FiniteHMM& hmm, const Categorical& mu) {
  if (mu.size() != hmm.hidden_states()) throw DimensionError("filter prior has the wrong number of states");
}

}  // namespace

Categorical filter_update_exact(const FiniteHMM& hmm, const Categorical& nu, int y, int y2) {
  check_prior(hmm, nu);
  check_symbol(hmm, y);
  check_symbol(hmm, y2);
  const int m = hmm.hidden_states();
  Eigen::VectorXd next = Eigen::VectorXd::Zero(m);
  for (int x = 0; x < m; ++x) {
    if (nu[x] == 0.0) continue;
    for (int x2 = 0; x2 < m; ++x2) next(x2) += nu[x] * hmm.P0()(x, x2) * hmm.g(x, y, x2, y2);
  }
  const double z = next.sum();
  if (!(z > 0.0)) throw DegenerateModel("filter update: observation has zero likelihood under the predictor");
  return Categorical(next / z);
}

std::vector<Categorical> exact_filter(const FiniteHMM& hmm, const Categorical& mu, std::span<const int> y) {
  check_prior(hmm, mu);
  if (y.empty()) throw InvalidArgument("exact_filter: empty observation path");
  std::vector<Categorical> out{mu};
  out.reserve(y.size());
  for (std::size_t n = 0; n + 1 < y.size(); ++n) out.push_back(filter_update_exact(hmm, out.back(), y[n], y[n + 1]));
  return out;
}

std::vector<Categorical> brute_force_filter(const FiniteHMM& hmm, const Categorical& mu, std::span<const int> y) {
  check_prior(hmm, mu);
  const int m = hmm.hidden_states();
  if (y.empty() || y.size() > 11 || m > 8) throw CapExceeded("brute_force_filter: needs T <= 10 and at most 8 states");
  for (int s : y) check_symbol(hmm, s);
  std::vector<Categorical> out;
  for (std::size_t n = 0; n < y.size(); ++n) {
    Eigen::VectorXd post = Eigen::VectorXd::Zero(m);
    std::vector<int> path(n + 1, 0);
    for (;;) {
      double w = mu[path[0]];
      for (std::size_t t = 0; t < n && w > 0.0; ++t)
        w *= hmm.P0()(path[t], path[t + 1]) * hmm.g(path[t], y[t], path[t + 1], y[t + 1]);
      post(path[n]) += w;
      std::size_t pos = 0;
      while (pos <= n && ++path[pos] == m) path[pos++] = 0;
      if (pos > n) break;
    }
    if (!(post.sum() > 0.0)) throw DegenerateModel("brute_force_filter: observation path has zero likelihood");
    out.push_back(Categorical::normalized(std::move(post)));
  }
  return out;
}

void validate(const ParticleConfig& cfg) {
  if (cfg.particles < 2) throw InvalidArgument("particle filter: need at least 2 particles");
  if (!(cfg.resample_threshold > 0.0 && cfg.resample_threshold <= 1.0))
    throw InvalidArgument("particle filter: resample threshold must lie in (0, 1]");
}

double effective_sample_size(const Eigen::VectorXd& weights) { return 1.0 / weights.squaredNorm(); }

std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Eigen::Index count, double u) {
  std::vector<Eigen::Index> picks(static_cast<std::size_t>(count));
  double cdf = weights(0);
  Eigen::Index j = 0;
  const Eigen::Index last = weights.size() - 1;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double target = (static_cast<double>(i) + u) / static_cast<double>(count);
    while (target >= cdf && j < last) cdf += weights(++j);
    picks[static_cast<std::size_t>(i)] = j;
  }
  return picks;
}

namespace {

struct Propagated {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;
};

Propagated propagate(const StateSpaceModel& model, const AtomicMeasure& cloud, const Observation& y, StreamKey key,
                     std::uint64_t step) {
  if (cloud.dim() != model.state_dim()) throw DimensionError("particle cloud does not match the model state");
  const Eigen::Index n = cloud.size();
  Propagated out{Eigen::MatrixXd(cloud.dim(), n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    Stream noise(key, (step << 32) | static_cast<std::uint64_t>(i));
    out.atoms.col(i) = model.step(cloud.atoms().col(i), noise);
    out.weights(i) = std::log(cloud.weights()(i)) + model.obs_log_density(out.atoms.col(i), y);
  }
  const double top = out.weights.maxCoeff();
  if (!std::isfinite(top)) throw DegenerateModel("particle filter: every particle has zero likelihood");
  out.weights = (out.weights.array() - top).exp();
  out.weights /= out.weights.sum();
  return out;
}

bool wants_resample(const Propagated& p, const ParticleConfig& cfg) {
  return effective_sample_size(p.weights) < cfg.resample_threshold * static_cast<double>(cfg.particles);
}

Stream resampling_stream(StreamKey key, std::uint64_t step) { return Stream(key, (step << 32) | 0xffffffffull); }

AtomicMeasure gather(const Eigen::MatrixXd& atoms, const std::vector<Eigen::Index>& picks) {
  Eigen::MatrixXd chosen(atoms.rows(), static_cast<Eigen::Index>(picks.size()));
  for (std::size_t i = 0; i < picks.size(); ++i) chosen.col(static_cast<Eigen::Index>(i)) = atoms.col(picks[i]);
  return AtomicMeasure::uniform(std::move(chosen));
}

AtomicMeasure finish(Propagated p, const ParticleConfig& cfg, Stream& resampler) {
  if (!wants_resample(p, cfg)) return AtomicMeasure(std::move(p.atoms), std::move(p.weights));
  return gather(p.atoms, systematic_resample(p.weights, cfg.particles, resampler.uniform()));
}

Eigen::Index invert(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(it - cdf.begin()), static_cast<Eigen::Index>(cdf.size()) - 1);
}

std::vector<double> cumulative(const Eigen::VectorXd& w) {
  std::vector<double> cdf(static_cast<std::size_t>(w.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) cdf[static_cast<std::size_t>(i)] = s += w(i);
  return cdf;
}

}  // namespace

AtomicMeasure filter_update_particle(const StateSpaceModel& model, const AtomicMeasure& cloud, const Observation& y,
                                     const ParticleConfig& cfg, StreamKey key, std::uint64_t step) {
  validate(cfg);
  Stream resampler = resampling_stream(key, step);
  return finish(propagate(model, cloud, y, key, step), cfg, resampler);
}

std::pair<AtomicMeasure, AtomicMeasure> coupled_filter_update(const StateSpaceModel& model, const AtomicMeasure& a,
                                                              const AtomicMeasure& b, const Observation& y,
                                                              const ParticleConfig& cfg, StreamKey key,
                                                              std::uint64_t step) {
  validate(cfg);
  if (a.size() != b.size()) throw DimensionError("coupled_filter_update: clouds differ in size");
  Propagated pa = propagate(model, a, y, key, step), pb = propagate(model, b, y, key, step);
  Stream resampler = resampling_stream(key, step);
  if (!wants_resample(pa, cfg) || !wants_resample(pb, cfg)) {
    Stream other = resampler;
    return {finish(std::move(pa), cfg, resampler), finish(std::move(pb), cfg, other)};
  }
  const Eigen::VectorXd common = pa.weights.cwiseMin(pb.weights);
  const double overlap = common.sum();
  const auto cdf_common = cumulative(common);
  const auto cdf_a = cumulative(pa.weights - common), cdf_b = cumulative(pb.weights - common);
  std::vector<Eigen::Index> picks_a(static_cast<std::size_t>(cfg.particles)), picks_b(picks_a.size());
  for (std::size_t i = 0; i < picks_a.size(); ++i) {
    const double u = resampler.uniform(), v = resampler.uniform();
    if (u < overlap) {
      picks_a[i] = picks_b[i] = invert(cdf_common, v);
    } else {
      picks_a[i] = invert(cdf_a, v);
      picks_b[i] = invert(cdf_b, v);
    }
  }
  return {gather(pa.atoms, picks_a), gather(pb.atoms, picks_b)};
}

AtomicMeasure filter_update_particle(const StateSpaceModel& model, const AtomicMeasure& cloud, const Observation& y,
                                     const ParticleConfig& cfg, std::uint64_t seed) {
  return filter_update_particle(model, cloud, y, cfg, StreamKey::derive(seed, 0, "particle-filter"), 0);
}

AtomicMeasure sample_cloud(const StateSampler& sampler, Eigen::Index n, Stream& stream) {
  if (n < 1) throw InvalidArgument("sample_cloud: need at least one atom");
  State first = sampler(stream);
  Eigen::MatrixXd atoms(first.size(), n);
  atoms.col(0) = first;
  for (Eigen::Index i = 1; i < n; ++i) atoms.col(i) = sampler(stream);
  return AtomicMeasure::uniform(std::move(atoms));
}

StabilityCurve stability_run(const FiniteHMM& hmm, const Categorical& mu, const Categorical& nu, int T,
                             std::uint64_t seed, std::uint64_t replica) {
  const HmmPath path = simulate(hmm, T, seed, replica);
  const auto a = exact_filter(hmm, mu, path.observed);
  const auto b = exact_filter(hmm, nu, path.observed);
  StabilityCurve curve{"tv", "full", {}, {}};
  for (int n = 0; n <= T; ++n) {
    curve.steps.push_back(n);
    curve.distance.push_back(tv_categorical(a[static_cast<std::size_t>(n)], b[static_cast<std::size_t>(n)]));
  }
  return curve;
}

CloudDistanceSpec bl_cloud_distance(MetricSpec metric, BlOptions options) {
  return {"bl", "full", [metric = std::move(metric), options](const AtomicMeasure& p, const AtomicMeasure& q) {
            return bl_atomic(p, q, metric, options);
          }};
}

CloudDistanceSpec window_tv_distance(std::vector<Eigen::Index> coords) {
  return {"tv", "local-window", [coords = std::move(coords)](const AtomicMeasure& p, const AtomicMeasure& q) {
            std::map<std::vector<int>, double> diff;
            std::vector<int> key(coords.size());
            auto add = [&](const AtomicMeasure& c, double sign) {
              for (Eigen::Index i = 0; i < c.size(); ++i) {
                for (std::size_t j = 0; j < coords.size(); ++j) key[j] = static_cast<int>(c.atoms()(coords[j], i));
                diff[key] += sign * c.weights()(i);
              }
            };
            add(p, 1.0);
            add(q, -1.0);
            double tv = 0.0;
            for (const auto& [k, v] : diff) tv += std::abs(v);
            return std::min(tv, kTvMax);
          }};
}

CloudDistanceSpec finite_tv_distance(int states) {
  return {"tv", "full", [states](const AtomicMeasure& p, const AtomicMeasure& q) {
            Eigen::VectorXd h = Eigen::VectorXd::Zero(states);
            for (Eigen::Index i = 0; i < p.size(); ++i) h(static_cast<Eigen::Index>(p.atoms()(0, i))) += p.weights()(i);
            for (Eigen::Index i = 0; i < q.size(); ++i) h(static_cast<Eigen::Index>(q.atoms()(0, i))) -= q.weights()(i);
            return std::min(h.cwiseAbs().sum(), kTvMax);
          }};
}

StabilityCurve stability_run(const StateSpaceModel& model, const StateSampler& mu, const StateSampler& nu,
                             const StateSampler& truth, const CloudDistanceSpec& distance,
                             const ParticleStabilityOptions& options, std::uint64_t seed, std::uint64_t replica) {
  validate(options.filter);
  if (options.horizon < 1 || options.record_every < 1)
    throw InvalidArgument("stability_run: horizon and record_every must be positive");
  Stream truth_stream(seed, replica, "truth");
  Stream obs_stream(seed, replica, "observation");
  Stream mu_stream(seed, replica, "prior-mu"), nu_stream(seed, replica, "prior-nu");
  const StreamKey filter_key = StreamKey::derive(seed, replica, "particle-filter");

  State x = truth(truth_stream);
  AtomicMeasure a = sample_cloud(mu, options.filter.particles, mu_stream);
  AtomicMeasure b = sample_cloud(nu, options.filter.particles, nu_stream);
  StabilityCurve curve{distance.kind, distance.sigma_field, {0}, {distance.fn(a, b)}};
  for (int n = 1; n <= options.horizon; ++n) {
    x = model.step(x, truth_stream);
    const Observation y = model.observe(x, obs_stream);
    const auto step = static_cast<std::uint64_t>(n);
    if (options.coupled_resampling) {
      std::tie(a, b) = coupled_filter_update(model, a, b, y, options.filter, filter_key, step);
    } else {
      a = filter_update_particle(model, a, y, options.filter, filter_key, step);
      b = filter_update_particle(model, b, y, options.filter, filter_key, step);
    }
    if (n % options.record_every == 0 || n == options.horizon) {
      curve.steps.push_back(n);
      curve.distance.push_back(distance.fn(a, b));
    }
  }
  return curve;
}

StabilityCurve median_curve(std::span<const StabilityCurve> curves) {
  if (curves.empty()) throw InvalidArgument("median_curve: no curves");
  StabilityCurve out{curves[0].kind, curves[0].sigma_field, curves[0].steps, {}};
  std::vector<double> column(curves.size());
  for (std::size_t j = 0; j < out.steps.size(); ++j) {
    for (std::size_t c = 0; c < curves.size(); ++c) {
      if (curves[c].steps != out.steps) throw DimensionError("median_curve: curves have different steps");
      column[c] = curves[c].distance[j];
    }
    std::sort(column.begin(), column.end());
    const std::size_t k = column.size();
    out.distance.push_back(k % 2 ? column[k / 2] : 0.5 * (column[k / 2 - 1] + column[k / 2]));
  }
  return out;
}

double tail_to_head_ratio(const StabilityCurve& curve) {
  const std::size_t n = curve.distance.size();
  if (n < 2) throw InvalidArgument("tail_to_head_ratio: curve too short");
  const std::size_t q = std::max<std::size_t>(1, n / 4);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    head += curve.distance[i];
    tail += curve.distance[n - 1 - i];
  }
  if (head == 0.0) return tail == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return tail / head;
}

bool decreasing(const StabilityCurve& curve) { return tail_to_head_ratio(curve) <= kDecreaseRatio; }

FilterPoint gamma_step(const FiniteHMM& hmm, const FilterPoint& state, Stream& stream) {
  const int x = sample_index(state.filter.probs(), stream.uniform());
  const int l = hmm.symbols();
  const int next = sample_index(hmm.joint_chain().P().row(x * l + state.symbol), stream.uniform());
  const int y2 = next % l;
  return {filter_update_exact(hmm, state.filter, state.symbol, y2), y2};
}

FilterPoint gamma_step(const FiniteHMM& hmm, const FilterPoint& state, std::uint64_t seed) {
  Stream stream(seed, 0, "gamma");
  return gamma_step(hmm, state, stream);
}

BatchMean batch_mean(std::span<const double> series, int batches) {
  if (batches < 2 || series.size() < static_cast<std::size_t>(batches))
    throw InvalidArgument("batch_mean: need at least two batches of one sample");
  const std::size_t size = series.size() / static_cast<std::size_t>(batches);
  Eigen::VectorXd means(batches);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += series[static_cast<std::size_t>(b) * size + i];
    means(b) = s / static_cast<double>(size);
  }
  const double mean = means.mean();
  const double var = (means.array() - mean).square().sum() / (batches - 1);
  return {mean, std::sqrt(var / batches), std::vector<double>(means.begin(), means.end())};
}

GammaErgodicityReport gamma_ergodicity_probe(const FiniteHMM& hmm, const FilterPoint& a, const FilterPoint& b,
                                             int steps, std::uint64_t seed, int batches) {
  if (steps < batches) throw InvalidArgument("gamma_ergodicity_probe: fewer steps than batches");
  GammaErgodicityReport report;
  const int m = hmm.hidden_states(), l = hmm.symbols();
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(m, 0.0, m - 1.0);
  report.symbol_frequency = Eigen::VectorXd::Zero(l);
  const FilterPoint starts[2] = {a, b};
  for (int run = 0; run < 2; ++run) {
    Stream stream(seed, static_cast<std::uint64_t>(run), "gamma");
    FilterPoint state = starts[run];
    std::vector<double> m1, m2;
    m1.reserve(static_cast<std::size_t>(steps));
    m2.reserve(static_cast<std::size_t>(steps));
    for (int n = 0; n < steps; ++n) {
      state = gamma_step(hmm, state, stream);
      const double v = state.filter.probs().dot(f);
      m1.push_back(v);
      m2.push_back(v * v);
      if (run == 0) report.symbol_frequency(state.symbol) += 1.0;
    }
    report.first[run] = batch_mean(m1, batches);
    report.second[run] = batch_mean(m2, batches);
  }
  report.symbol_frequency /= steps;
  const auto& joint = hmm.joint_stationary().probs();
  report.symbol_stationary = Eigen::VectorXd::Zero(l);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < l; ++y) report.symbol_stationary(y) += joint(x * l + y);
  auto within = [](const BatchMean& u, const BatchMean& v) {
    return std::abs(u.mean - v.mean) <= 3.0 * std::hypot(u.standard_error, v.standard_error);
  };
  report.agree = within(report.first[0], report.first[1]) && within(report.second[0], report.second[1]);
  return report;
}

}  // namespace ergolab
