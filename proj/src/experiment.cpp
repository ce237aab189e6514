#include "ergolab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "ergolab/conditional.hpp"
#include "ergolab/fixtures.hpp"
#include "ergolab/markov.hpp"

namespace ergolab {

using nlohmann::json;

std::unique_ptr<StateSpaceModel> make_model(const ModelConfig& config) {
  if (config.id == "heat") return std::make_unique<HeatModel>(std::get<HeatParams>(config.params));
  if (config.id == "navier_stokes") return std::make_unique<NavierStokesModel>(std::get<NSParams>(config.params));
  if (config.id == "spin") return std::make_unique<SpinModel>(std::get<SpinParams>(config.params));
  if (config.id == "delay") return std::make_unique<DelayModel>(std::get<DelayParams>(config.params));
  throw InvalidArgument("make_model: '" + config.id + "' is not a state-space model");
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

const FixtureParams& fixture_params(const ExperimentConfig& cfg) { return std::get<FixtureParams>(cfg.model.params); }

ChainFixture chain_fixture(const ExperimentConfig& cfg) {
  const auto& p = fixture_params(cfg);
  if (cfg.model.id == "two_state_flip") return two_state_flip(p.p);
  if (cfg.model.id == "product_flip") return product_flip_fixture(p.d, p.p);
  if (cfg.model.id == "periodic2") return periodic2();
  throw InvalidArgument("'" + cfg.model.id + "' is not a chain fixture");
}

HmmFixture hmm_fixture(const ExperimentConfig& cfg) {
  if (cfg.model.id == "mixing3_hmm") return mixing3_hmm();
  if (cfg.model.id == "revealing_hmm") return revealing_hmm(fixture_params(cfg).eps);
  if (cfg.model.id == "flat_hmm") return flat_hmm();
  if (cfg.model.id == "parity_degenerate_hmm") return parity_degenerate_hmm();
  throw InvalidArgument("'" + cfg.model.id + "' is not an HMM fixture");
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

void add_trace(std::vector<Record>& out, int replica, const std::string& metric, const std::vector<double>& values,
               const std::string& meta = "") {
  for (std::size_t n = 0; n < values.size(); ++n) out.push_back({replica, static_cast<int>(n), metric, values[n], meta});
}

ExperimentOutput run_zero_two(const ExperimentConfig& cfg) {
  const auto fixture = chain_fixture(cfg);
  Projection proj = Projection::identity(fixture.chain.n_states());
  std::string projection = "identity";
  if (!cfg.identity_projection) {
    proj = product_flip(fixture_params(cfg).d, fixture_params(cfg).p).coordinate_projection(cfg.coords);
    projection = "coords";
  }
  const auto report = zero_two_probe(fixture.chain, proj, cfg.n_max, cfg.k_max, cfg.alpha);
  ExperimentOutput out;
  add_trace(out.records, 0, "max_pair_tv", report.tv_trace);
  const double threshold = 2.0 - cfg.alpha;
  out.summary = {{"threshold", threshold},
                 {"projection", projection},
                 {"coords", cfg.coords},
                 {"locally_irreducible", report.locally_irreducible},
                 {"verdict", report.locally_irreducible ? "locally irreducible" : "not locally ergodic"},
                 {"witness_n", report.witness_n ? json(*report.witness_n) : json(nullptr)},
                 {"pair_witness", report.pair_witness},
                 {"plot_metric", "max_pair_tv"}};
  return out;
}

ExperimentOutput run_local_mixing(const ExperimentConfig& cfg) {
  const auto& p = fixture_params(cfg);
  const ProductChain product = product_flip(p.d, p.p);
  const auto report = local_mixing_probe(product, cfg.coords, cfg.n_max, cfg.k_max, cfg.alpha);
  ExperimentOutput out;
  add_trace(out.records, 0, "local_max_pair_tv", report.local.tv_trace);
  add_trace(out.records, 1, "full_max_pair_tv", report.full_tv_trace);
  for (std::size_t d = 0; d < report.dimension_contrast.size(); ++d)
    out.records.push_back({2, static_cast<int>(d + 1), "dimension_contrast", report.dimension_contrast[d],
                           "n=" + std::to_string(report.contrast_n)});
  out.summary = {{"threshold", 2.0 - cfg.alpha},
                 {"coords", cfg.coords},
                 {"locally_irreducible", report.local.locally_irreducible},
                 {"witness_n", report.local.witness_n ? json(*report.local.witness_n) : json(nullptr)},
                 {"contrast_n", report.contrast_n},
                 {"verdict", report.local.locally_irreducible ? "locally mixing" : "not locally mixing"},
                 {"plot_metric", "local_max_pair_tv"}};
  return out;
}

ExperimentOutput run_beta_decay(const ExperimentConfig& cfg) {
  const auto fixture = chain_fixture(cfg);
  std::vector<double> beta;
  for (int n = 0; n <= cfg.n_max; ++n) beta.push_back(beta_mixing_coeff(fixture.chain, n));
  ExperimentOutput out;
  add_trace(out.records, 0, "beta", beta);
  bool nonincreasing = true;
  for (std::size_t n = 1; n < beta.size(); ++n) nonincreasing = nonincreasing && beta[n] <= beta[n - 1] + 1e-12;
  out.summary = {{"nonincreasing", nonincreasing},
                 {"beta_final", beta.back()},
                 {"verdict", beta.back() < 1e-3 ? "mixing" : "not mixing at n_max"},
                 {"plot_metric", "beta"}};
  if (fixture.tv_decay_rate && cfg.model.id == "two_state_flip") {
    double worst = 0.0;
    for (std::size_t n = 0; n < beta.size(); ++n)
      worst = std::max(worst, std::abs(beta[n] - std::pow(std::abs(*fixture.tv_decay_rate), n)));
    out.summary["closed_form_max_error"] = worst;
  }
  return out;
}

ExperimentOutput run_conditional(const ExperimentConfig& cfg) {
  const auto fixture = hmm_fixture(cfg);
  const auto table = inheritance_experiment(fixture.hmm, cfg.paths, cfg.horizon, cfg.lags, cfg.seed);
  ExperimentOutput out;
  for (Eigen::Index path = 0; path < table.per_path.rows(); ++path)
    for (std::size_t j = 0; j < table.lags.size(); ++j)
      out.records.push_back({static_cast<int>(path), table.lags[j], "max_pair_conditional_tv",
                             table.per_path(path, static_cast<Eigen::Index>(j)), ""});
  bool monotone = true;
  for (std::size_t j = 1; j < table.max_tv.size(); ++j)
    monotone = monotone && table.max_tv[j] <= table.max_tv[j - 1] + 1e-9;
  const bool decays = table.max_tv.back() < 1e-3;
  out.summary = {{"lags", table.lags},
                 {"max_tv", table.max_tv},
                 {"mean_tv", table.mean_tv},
                 {"nondegenerate", table.nondegenerate},
                 {"joint_beta", table.joint_beta},
                 {"truncation_delta", table.truncation_delta},
                 {"monotone", monotone},
                 {"threshold", 1e-3},
                 {"verdict", decays ? "conditionally ergodic" : "conditional TV does not vanish"},
                 {"plot_metric", "max_pair_conditional_tv"}};
  return out;
}

/// Gaussian on the forced modes with the linearized stationary variance, shifted along the first one.
StateSampler ns_prior(const NavierStokesModel& m, double shift) {
  std::vector<std::pair<std::size_t, double>> modes;
  for (const auto& f : m.params().forcing)
    if (auto i = m.mode_index(f.k)) {
      const double kk = f.k[0] * f.k[0] + f.k[1] * f.k[1];
      modes.emplace_back(*i, f.sigma * std::numbers::pi * std::sqrt(1.0 / (2.0 * m.params().viscosity * kk)));
    }
  const std::size_t shifted = modes.empty() ? 0 : modes.front().first;
  return [&m, modes, shifted, shift](Stream& s) {
    State x = State::Zero(m.state_dim());
    for (const auto& [i, sd] : modes) {
      x(static_cast<Eigen::Index>(2 * i)) = sd * s.normal() / std::numbers::sqrt2;
      x(static_cast<Eigen::Index>(2 * i + 1)) = sd * s.normal() / std::numbers::sqrt2;
    }
    x(static_cast<Eigen::Index>(2 * shifted)) += shift;
    return x;
  };
}

json curve_json(const StabilityCurve& c) { return {{"steps", c.steps}, {"distance", c.distance}}; }

void summarize_curves(const ExperimentConfig& cfg, const std::vector<StabilityCurve>& curves, ExperimentOutput& out) {
  const StabilityCurve median = median_curve(curves);
  const double ratio = tail_to_head_ratio(median);
  const double head = median.distance.front(), tail = median.distance.back();
  const double final_ratio = head > 0.0 ? tail / head : 0.0;
  out.summary["distance_kind"] = median.kind;
  out.summary["sigma_field"] = median.sigma_field;
  out.summary["median"] = curve_json(median);
  out.summary["tail_to_head_ratio"] = ratio;
  out.summary["decrease_threshold"] = kDecreaseRatio;
  out.summary["decreasing"] = ratio <= kDecreaseRatio;
  out.summary["final_to_initial_ratio"] = final_ratio;
  if (cfg.ratio_threshold) {
    out.summary["ratio_threshold"] = *cfg.ratio_threshold;
    out.summary["ratio_pass"] = final_ratio <= *cfg.ratio_threshold;
  }
  out.summary["verdict"] = ratio <= kDecreaseRatio ? "filter stable" : "no decrease detected";
  out.summary["plot_metric"] = median.kind;
  for (std::size_t r = 0; r < curves.size(); ++r)
    for (std::size_t i = 0; i < curves[r].steps.size(); ++i)
      out.records.push_back({static_cast<int>(r), curves[r].steps[i], curves[r].kind, curves[r].distance[i],
                             "sigma_field=" + curves[r].sigma_field});
}

ExperimentOutput run_filter_stability(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  std::vector<StabilityCurve> curves(static_cast<std::size_t>(cfg.replicas));
  if (!std::holds_alternative<FixtureParams>(cfg.model.params)) {
    const auto model = make_model(cfg.model);
    StateSampler stationary = [&](Stream& s) { return model->sample_stationary(s); };
    StateSampler mu = stationary, nu = stationary, truth = stationary;
    CloudDistanceSpec distance = bl_cloud_distance(model->metric(), {.subsample = true, .seed = cfg.seed});
    std::string priors;
    if (const auto* heat = dynamic_cast<const HeatModel*>(model.get())) {
      const double shift = cfg.prior_shift * std::sqrt(heat->stationary_variance()(0));
      mu = [&, shift](Stream& s) {
        State x = model->sample_stationary(s);
        x(0) += shift;
        return x;
      };
      priors = "stationary shifted on mode 1 vs stationary";
    } else if (const auto* ns = dynamic_cast<const NavierStokesModel*>(model.get())) {
      mu = ns_prior(*ns, cfg.prior_shift);
      nu = ns_prior(*ns, -cfg.prior_shift);
      priors = "gaussian on forced modes, +shift vs -shift";
    } else if (dynamic_cast<const SpinModel*>(model.get())) {
      const Eigen::Index L = model->state_dim();
      mu = [L](Stream&) { return State(State::Zero(L)); };
      nu = [L](Stream&) { return State(State::Ones(L)); };
      distance = window_tv_distance({L - 1, 0, 1});
      priors = "all down vs all up";
    } else {
      const Eigen::Index n = model->state_dim();
      const double shift = cfg.prior_shift;
      mu = [n, shift](Stream&) { return State(State::Constant(n, shift)); };
      nu = [n, shift](Stream&) { return State(State::Constant(n, -shift)); };
      priors = "constant window +shift vs -shift";
    }
    ParticleStabilityOptions options;
    options.filter = cfg.particles;
    options.horizon = cfg.horizon;
    options.record_every = cfg.record_every;
    options.coupled_resampling = cfg.coupled_resampling;
    parallel_for(cfg.replicas, cfg.threads, [&](int r) {
      curves[static_cast<std::size_t>(r)] =
          stability_run(*model, mu, nu, truth, distance, options, cfg.seed, static_cast<std::uint64_t>(r));
    });
    out.summary["priors"] = priors;
    out.summary["particles"] = cfg.particles.particles;
  } else {
    const auto fixture = hmm_fixture(cfg);
    const int m = fixture.hmm.hidden_states();
    parallel_for(cfg.replicas, cfg.threads, [&](int r) {
      curves[static_cast<std::size_t>(r)] = stability_run(fixture.hmm, Categorical::point(m, 0),
                                                          Categorical::point(m, m - 1), cfg.horizon, cfg.seed,
                                                          static_cast<std::uint64_t>(r));
    });
    out.summary["priors"] = "point mass on state 0 vs on the last state";
    out.summary["nondegenerate"] = fixture.hmm.nondegenerate();
  }
  summarize_curves(cfg, curves, out);
  return out;
}

std::vector<std::pair<State, State>> stationary_pairs(const StateSpaceModel& model, int count, std::uint64_t seed) {
  Stream stream(seed, 0, "init-pairs");
  std::vector<std::pair<State, State>> pairs;
  if (model.name() == "spin") {
    pairs.emplace_back(State::Zero(model.state_dim()), State::Ones(model.state_dim()));
  }
  while (static_cast<int>(pairs.size()) < count) {
    State a = model.sample_stationary(stream);
    State b = model.sample_stationary(stream);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return pairs;
}

ExperimentOutput run_coupling_alpha(const ExperimentConfig& cfg) {
  const auto model = make_model(cfg.model);
  const auto pairs = stationary_pairs(*model, cfg.pairs, cfg.seed);
  AlphaOptions options;
  options.horizon = cfg.horizon;
  options.epsilon = cfg.epsilon;
  options.replicas = cfg.replicas;
  options.kind = cfg.coupling;
  std::vector<CouplingReport> reports(pairs.size()), doubled(cfg.doubled_horizon ? pairs.size() : 0);
  parallel_for(static_cast<int>(pairs.size()), cfg.threads, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    reports[idx] = alpha_for_pair(*model, pairs[idx], cfg.horizon, options, cfg.seed, idx);
    if (cfg.doubled_horizon) doubled[idx] = alpha_for_pair(*model, pairs[idx], 2 * cfg.horizon, options, cfg.seed, idx);
  });
  ExperimentOutput out;
  json per_pair = json::array();
  double alpha_min = 2.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t r = 0; r < reports[i].tail_sums.size(); ++r)
      out.records.push_back({static_cast<int>(r), static_cast<int>(i), "tail_sum", reports[i].tail_sums[r], "T=" + std::to_string(cfg.horizon)});
    if (cfg.doubled_horizon)
      for (std::size_t r = 0; r < doubled[i].tail_sums.size(); ++r)
        out.records.push_back({static_cast<int>(r), static_cast<int>(i), "tail_sum", doubled[i].tail_sums[r],
                               "T=" + std::to_string(2 * cfg.horizon)});
    per_pair.push_back({{"pair", i},
                        {"successes", reports[i].successes},
                        {"replicas", reports[i].replicas},
                        {"alpha_hat", reports[i].alpha_hat},
                        {"wilson", interval_json(reports[i].wilson)}});
    if (reports[i].alpha_hat < alpha_min) {
      alpha_min = reports[i].alpha_hat;
      worst = i;
    }
  }
  out.summary = {{"epsilon", cfg.epsilon},
                 {"coupling", cfg.coupling == CouplingKind::synchronous ? "synchronous" : "independent"},
                 {"per_pair", per_pair},
                 {"alpha_min", alpha_min},
                 {"worst_pair", worst},
                 {"wilson_worst", interval_json(reports[worst].wilson)},
                 {"verdict", alpha_min > 0.0 ? "coupling succeeds with positive probability" : "no coupling success"}};
  if (cfg.doubled_horizon) {
    double m = 2.0;
    for (const auto& d : doubled) m = std::min(m, d.alpha_hat);
    out.summary["alpha_min_doubled"] = m;
  }
  return out;
}

ExperimentOutput run_hellinger(const ExperimentConfig& cfg) {
  const auto model = make_model(cfg.model);
  auto pairs = stationary_pairs(*model, cfg.pairs, cfg.seed);
  // Nearby pairs probe the ratio close to the diagonal.
  Stream stream(cfg.seed, 1, "init-pairs");
  const std::size_t far = pairs.size();
  for (std::size_t i = 0; i < far; ++i) {
    State b = pairs[i].first;
    for (Eigen::Index j = 0; j < b.size(); ++j) b(j) += 1e-3 * stream.normal();
    pairs.emplace_back(pairs[i].first, std::move(b));
  }
  const auto check = hellinger_lipschitz_check(*model, pairs, model->strong_metric());
  ExperimentOutput out;
  for (std::size_t i = 0; i < check.ratios.size(); ++i)
    out.records.push_back({0, static_cast<int>(i), "ratio", check.ratios[i], i < far ? "pair=stationary" : "pair=nearby"});
  out.summary = {{"C_hat", check.C_hat}, {"max_gap", check.max_gap}, {"pairs", pairs.size()}, {"plot_metric", "ratio"}};
  if (const auto* heat = dynamic_cast<const HeatModel*>(model.get())) {
    out.summary["C_bound"] = heat->hellinger_constant();
    out.summary["within_bound"] = check.C_hat <= heat->hellinger_constant();
    out.summary["verdict"] = check.C_hat <= heat->hellinger_constant() ? "within the analytic bound" : "exceeds the analytic bound";
  } else {
    out.summary["verdict"] = std::isfinite(check.C_hat) ? "finite Lipschitz constant" : "unbounded ratio";
  }
  return out;
}

ExperimentOutput run_gamma(const ExperimentConfig& cfg) {
  const auto fixture = hmm_fixture(cfg);
  const int m = fixture.hmm.hidden_states(), l = fixture.hmm.symbols();
  const FilterPoint a{Categorical::point(m, 0), 0}, b{Categorical::uniform(m), l - 1};
  const auto report = gamma_ergodicity_probe(fixture.hmm, a, b, cfg.horizon, cfg.seed, cfg.batches);
  ExperimentOutput out;
  json runs = json::array();
  for (int run = 0; run < 2; ++run) {
    add_trace(out.records, run, "batch_mean_f", report.first[run].batches);
    add_trace(out.records, run, "batch_mean_f2", report.second[run].batches);
    runs.push_back({{"mean_f", report.first[run].mean},
                    {"se_f", report.first[run].standard_error},
                    {"mean_f2", report.second[run].mean},
                    {"se_f2", report.second[run].standard_error}});
  }
  std::vector<double> freq(report.symbol_frequency.begin(), report.symbol_frequency.end());
  std::vector<double> stat(report.symbol_stationary.begin(), report.symbol_stationary.end());
  add_trace(out.records, 2, "symbol_frequency", freq);
  add_trace(out.records, 2, "symbol_stationary", stat);
  out.summary = {{"runs", runs},
                 {"agreement_rule", "within 3 combined standard errors"},
                 {"agree", report.agree},
                 {"symbol_frequency", freq},
                 {"symbol_stationary", stat},
                 {"verdict", report.agree ? "time averages agree" : "time averages differ"},
                 {"plot_metric", "batch_mean_f"}};
  return out;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  if (cfg.kind == "zero_two") out = run_zero_two(cfg);
  else if (cfg.kind == "local_mixing") out = run_local_mixing(cfg);
  else if (cfg.kind == "beta_decay") out = run_beta_decay(cfg);
  else if (cfg.kind == "conditional_inheritance") out = run_conditional(cfg);
  else if (cfg.kind == "filter_stability") out = run_filter_stability(cfg);
  else if (cfg.kind == "coupling_alpha") out = run_coupling_alpha(cfg);
  else if (cfg.kind == "hellinger_check") out = run_hellinger(cfg);
  else if (cfg.kind == "gamma_ergodicity") out = run_gamma(cfg);
  else throw InvalidArgument("unknown experiment kind '" + cfg.kind + "'");
  std::stable_sort(out.records.begin(), out.records.end(), [](const Record& a, const Record& b) {
    return a.replica != b.replica ? a.replica < b.replica : a.step < b.step;
  });
  out.summary["experiment"] = cfg.name;
  out.summary["kind"] = cfg.kind;
  out.summary["model"] = cfg.model.id;
  out.summary["seed"] = cfg.seed;
  out.summary["replicas"] = cfg.replicas;
  out.summary["horizon"] = cfg.horizon;
  return out;
}

std::string to_csv(const std::string& experiment, const std::vector<Record>& records) {
  std::string out = "experiment,replica,step,metric,value,meta\n";
  char value[64];
  for (const auto& r : records) {
    std::snprintf(value, sizeof value, "%.17g", r.value);
    out += experiment + ',' + std::to_string(r.replica) + ',' + std::to_string(r.step) + ',' + r.metric + ',' + value +
           ',' + r.meta + '\n';
  }
  return out;
}

std::string to_svg(const std::string& title, const std::vector<Record>& records, const std::string& metric) {
  std::map<int, std::vector<std::pair<double, double>>> series;
  for (const auto& r : records)
    if (r.metric == metric && std::isfinite(r.value)) series[r.replica].emplace_back(r.step, r.value);
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& [_, pts] : series)
    for (const auto& [x, y] : pts) {
      if (first) x0 = x1 = x, y0 = y1 = y, first = false;
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  const bool log_y = !first && y0 > 0.0 && y1 / y0 > 100.0;
  auto fy = [&](double y) { return log_y ? std::log10(y) : y; };
  double ly0 = fy(y0), ly1 = fy(y1);
  if (ly1 <= ly0) ly1 = ly0 + 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (fy(y) - ly0) / (ly1 - ly0) * (H - T - B); };
  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yl = ly0 + (ly1 - ly0) * i / 4.0;
    const double yv = log_y ? std::pow(10.0, yl) : yl;
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">step</text>\n"
    << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">"
    << metric << (log_y ? " (log)" : "") << "</text>\n";
  static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  for (const auto& [replica, pts] : series) {
    s << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << colours[static_cast<unsigned>(replica) % 10]
      << "\" points=\"";
    for (const auto& [x, y] : pts) s << px(x) << ',' << py(y) << ' ';
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace ergolab
