#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "ergolab/conditional.hpp"
#include "ergolab/experiment.hpp"
#include "ergolab/fixtures.hpp"

namespace ergolab {

ConfigError::ConfigError(std::vector<std::string> msgs)
    : Error(msgs.empty() ? std::string("invalid config") : msgs.front()), messages(std::move(msgs)) {}

namespace {

using Errors = std::vector<std::string>;

int line_of(const toml::node* node, int fallback) {
  if (!node) return fallback;
  const auto line = static_cast<int>(node->source().begin.line);
  return line > 0 ? line : fallback;
}

/// Typed, line-aware access to one TOML table; records unknown keys on done().
class Section {
 public:
  Section(const toml::table* table, std::string name, std::string file, Errors& errors, int fallback_line)
      : table_(table), name_(std::move(name)), file_(std::move(file)), errors_(errors),
        line_(line_of(table, fallback_line)) {}

  bool present() const { return table_ != nullptr; }
  int line() const { return line_; }
  int line(const std::string& key) const { return line_of(table_ ? table_->get(key) : nullptr, line_); }

  void error(const std::string& key, const std::string& message) {
    std::ostringstream out;
    out << file_ << ':' << line(key) << ": [" << name_ << "] " << (key.empty() ? "" : key + ": ") << message;
    errors_.push_back(out.str());
  }

  const toml::node* node(const std::string& key) {
    used_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    error(key, "expected an integer");
    return std::nullopt;
  }

  std::optional<double> real(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (n->is_integer()) return static_cast<double>(*n->value<std::int64_t>());
    if (auto v = n->value_exact<double>()) return *v;
    error(key, "expected a number");
    return std::nullopt;
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<bool>()) return *v;
    error(key, "expected true or false");
    return std::nullopt;
  }

  std::optional<std::string> string(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::string>()) return *v;
    error(key, "expected a string");
    return std::nullopt;
  }

  std::optional<std::vector<double>> reals(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    std::vector<double> out;
    if (const auto* arr = n->as_array()) {
      for (const auto& item : *arr) {
        if (item.is_integer()) out.push_back(static_cast<double>(*item.value<std::int64_t>()));
        else if (auto v = item.value_exact<double>()) out.push_back(*v);
        else return error(key, "expected an array of numbers"), std::nullopt;
      }
      return out;
    }
    error(key, "expected an array of numbers");
    return std::nullopt;
  }

  std::optional<std::vector<int>> integers(const std::string& key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    std::vector<int> out;
    if (const auto* arr = n->as_array()) {
      for (const auto& item : *arr) {
        if (auto v = item.value_exact<std::int64_t>()) out.push_back(static_cast<int>(*v));
        else return error(key, "expected an array of integers"), std::nullopt;
      }
      return out;
    }
    error(key, "expected an array of integers");
    return std::nullopt;
  }

  template <typename T>
  void assign(const std::string& key, T& target, std::optional<T> value) {
    (void)key;
    if (value) target = *value;
  }

  void positive_int(const std::string& key, int& target, int minimum = 1) {
    if (auto v = integer(key)) {
      if (*v < minimum || *v > 100000000) error(key, "must be an integer >= " + std::to_string(minimum));
      else target = static_cast<int>(*v);
    }
  }

  void done() {
    if (!table_) return;
    for (const auto& [key, value] : *table_) {
      const std::string k(key.str());
      if (!used_.count(k)) {
        std::ostringstream out;
        out << file_ << ':' << line_of(&value, line_) << ": [" << name_ << "] unknown field '" << k << "'";
        errors_.push_back(out.str());
      }
    }
  }

 private:
  const toml::table* table_;
  std::string name_, file_;
  Errors& errors_;
  int line_;
  std::set<std::string> used_;
};

const std::vector<std::string> kChainFixtures{"two_state_flip", "product_flip", "periodic2"};
const std::vector<std::string> kHmmFixtures{"mixing3_hmm", "revealing_hmm", "flat_hmm", "parity_degenerate_hmm"};
const std::vector<std::string> kContinuous{"heat", "navier_stokes", "spin", "delay"};

bool among(const std::string& s, const std::vector<std::string>& list) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> lists) {
  std::vector<std::string> out;
  for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
  return out;
}

std::string listing(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void read_heat(Section& s, HeatParams& p) {
  s.positive_int("modes", p.modes);
  if (auto v = s.reals("sigma")) p.sigma = Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size()));
  s.assign("sigma_scale", p.sigma_scale, s.real("sigma_scale"));
  s.assign("delta", p.delta, s.real("delta"));
  if (auto v = s.reals("obs_points")) p.obs_points = *v;
  s.assign("obs_variance", p.obs_variance, s.real("obs_variance"));
}

void read_ns(Section& s, NSParams& p) {
  s.positive_int("k_max", p.k_max, 2);
  s.assign("viscosity", p.viscosity, s.real("viscosity"));
  s.assign("inner_step", p.inner_step, s.real("inner_step"));
  s.assign("delta", p.delta, s.real("delta"));
  s.assign("obs_variance", p.obs_variance, s.real("obs_variance"));
  s.assign("cfl_limit", p.cfl_limit, s.real("cfl_limit"));
  if (auto v = s.integer("burn_in")) {
    if (*v < 0) s.error("burn_in", "must be >= 0");
    else p.burn_in = static_cast<int>(*v);
  }
  if (const auto* n = s.node("forcing")) {
    const auto* arr = n->as_array();
    if (!arr) return s.error("forcing", "expected an array of {k = [k1, k2], sigma = number} tables");
    p.forcing.clear();
    for (const auto& item : *arr) {
      const auto* t = item.as_table();
      const auto* k = t ? t->get_as<toml::array>("k") : nullptr;
      const auto* sigma = t ? t->get("sigma") : nullptr;
      if (!k || k->size() != 2 || !k->get(0)->is_integer() || !k->get(1)->is_integer() || !sigma ||
          !(sigma->is_integer() || sigma->is_floating_point()))
        return s.error("forcing", "each entry needs k = [k1, k2] (integers) and sigma = number");
      const double sig = sigma->is_integer() ? static_cast<double>(*sigma->value<std::int64_t>()) : *sigma->value<double>();
      p.forcing.push_back({{static_cast<int>(*k->get(0)->value<std::int64_t>()),
                            static_cast<int>(*k->get(1)->value<std::int64_t>())},
                           sig});
    }
  }
  if (auto v = s.reals("obs_points")) {
    if (v->size() % 2) return s.error("obs_points", "expected a flat array of (z1, z2) coordinate pairs");
    p.obs_points.clear();
    for (std::size_t i = 0; i < v->size(); i += 2) p.obs_points.push_back({(*v)[i], (*v)[i + 1]});
  }
}

void read_spin(Section& s, SpinParams& p) {
  s.positive_int("sites", p.sites, 3);
  s.assign("beta", p.beta, s.real("beta"));
  s.assign("delta", p.delta, s.real("delta"));
  s.assign("c0", p.c0, s.real("c0"));
  s.assign("alpha0", p.alpha0, s.real("alpha0"));
  s.assign("alpha_decay", p.alpha_decay, s.real("alpha_decay"));
}

void read_delay(Section& s, DelayParams& p) {
  s.assign("a", p.a, s.real("a"));
  s.assign("b", p.b, s.real("b"));
  s.assign("sigma0", p.sigma0, s.real("sigma0"));
  s.assign("delay", p.delay, s.real("delay"));
  s.assign("h", p.h, s.real("h"));
  s.assign("delta", p.delta, s.real("delta"));
  s.assign("obs_variance", p.obs_variance, s.real("obs_variance"));
  if (auto v = s.integer("burn_in")) {
    if (*v < 0) s.error("burn_in", "must be >= 0");
    else p.burn_in = static_cast<int>(*v);
  }
}

void read_fixture(Section& s, const std::string& id, FixtureParams& p) {
  if (id == "two_state_flip" || id == "product_flip") s.assign("p", p.p, s.real("p"));
  if (id == "product_flip") s.positive_int("d", p.d);
  if (id == "revealing_hmm") s.assign("eps", p.eps, s.real("eps"));
}

/// Constructs whatever the model config names, turning library errors into anchored config errors.
void check_model(Section& s, const ModelConfig& m) {
  try {
    if (among(m.id, kContinuous)) {
      make_model(m);
    } else {
      const auto& p = std::get<FixtureParams>(m.params);
      if (m.id == "two_state_flip") two_state_flip(p.p);
      else if (m.id == "product_flip") product_flip(p.d, p.p).chain();
      else if (m.id == "revealing_hmm") revealing_hmm(p.eps);
    }
  } catch (const Error& e) {
    std::string what = e.what();
    std::string key;
    if (what.find("forcing") != std::string::npos) key = "forcing";
    s.error(key, what);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream out;
    out << source << ':' << e.source().begin.line << ": " << e.description();
    throw ConfigError({out.str()});
  }

  Errors errors;
  ExperimentConfig cfg;
  cfg.source = source;

  Section exp(root["experiment"].as_table(), "experiment", source, errors, 1);
  if (!exp.present()) errors.push_back(source + ":1: missing required table [experiment]");
  if (auto v = exp.string("kind")) cfg.kind = *v;
  else if (exp.present()) exp.error("", "missing required field 'kind'");
  const auto& catalog = experiment_catalog();
  const auto kind_it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& k) { return k.name == cfg.kind; });
  if (!cfg.kind.empty() && kind_it == catalog.end()) {
    std::vector<std::string> names;
    for (const auto& k : catalog) names.push_back(k.name);
    exp.error("kind", "unknown experiment kind '" + cfg.kind + "' (expected one of " + listing(names) + ")");
  }
  cfg.name = exp.string("name").value_or(std::filesystem::path(source).stem().string());
  if (cfg.name.empty() || cfg.name.find_first_of("/\\ ,\"") != std::string::npos)
    exp.error("name", "must be a nonempty name without spaces, commas, quotes or slashes");
  if (auto v = exp.integer("seed")) {
    if (*v < 0) exp.error("seed", "must be a nonnegative integer");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  } else if (exp.present()) {
    exp.error("", "missing required field 'seed' (seeds are always explicit)");
  }
  exp.positive_int("replicas", cfg.replicas);
  exp.positive_int("horizon", cfg.horizon);
  exp.positive_int("threads", cfg.threads);
  exp.done();

  Section model(root["model"].as_table(), "model", source, errors, exp.line());
  if (!model.present()) errors.push_back(source + ":1: missing required table [model]");
  if (auto v = model.string("id")) cfg.model.id = *v;
  else if (model.present()) model.error("", "missing required field 'id'");
  const auto& id = cfg.model.id;
  if (id == "heat") {
    HeatParams p;
    read_heat(model, p);
    cfg.model.params = p;
  } else if (id == "navier_stokes") {
    NSParams p;
    read_ns(model, p);
    cfg.model.params = p;
  } else if (id == "spin") {
    SpinParams p;
    read_spin(model, p);
    cfg.model.params = p;
  } else if (id == "delay") {
    DelayParams p;
    read_delay(model, p);
    cfg.model.params = p;
  } else if (among(id, fixture_names())) {
    FixtureParams p;
    read_fixture(model, id, p);
    cfg.model.params = p;
  } else if (!id.empty()) {
    model.error("id", "unknown model '" + id + "' (expected one of " +
                          listing(join({kContinuous, kChainFixtures, kHmmFixtures})) + ")");
  }
  model.done();

  Section params(root["params"].as_table(), "params", source, errors, exp.line());
  const std::string& kind = cfg.kind;
  if (kind == "zero_two" || kind == "local_mixing") {
    if (auto v = params.integers("coords")) {
      cfg.coords = *v;
      cfg.identity_projection = false;
    }
    params.positive_int("n_max", cfg.n_max, 0);
    params.positive_int("k_max", cfg.k_max, 0);
    if (auto v = params.real("alpha")) {
      if (!(*v > 0.0 && *v <= 2.0)) params.error("alpha", "must lie in (0, 2]");
      else cfg.alpha = *v;
    }
    if (kind == "local_mixing" && cfg.identity_projection) params.error("", "missing required field 'coords'");
  } else if (kind == "beta_decay") {
    params.positive_int("n_max", cfg.n_max, 0);
  } else if (kind == "conditional_inheritance") {
    params.positive_int("paths", cfg.paths);
    if (auto v = params.integers("lags")) cfg.lags = *v;
    else params.error("", "missing required field 'lags'");
  } else if (kind == "filter_stability") {
    int particles = static_cast<int>(cfg.particles.particles);
    params.positive_int("particles", particles, 2);
    cfg.particles.particles = particles;
    if (auto v = params.real("resample_threshold")) {
      if (!(*v > 0.0 && *v <= 1.0)) params.error("resample_threshold", "must lie in (0, 1]");
      else cfg.particles.resample_threshold = *v;
    }
    params.positive_int("record_every", cfg.record_every);
    params.assign("prior_shift", cfg.prior_shift, params.real("prior_shift"));
    params.assign("coupled_resampling", cfg.coupled_resampling, params.boolean("coupled_resampling"));
    if (auto v = params.real("ratio_threshold")) {
      if (!(*v > 0.0)) params.error("ratio_threshold", "must be positive");
      else cfg.ratio_threshold = *v;
    }
  } else if (kind == "coupling_alpha" || kind == "hellinger_check") {
    params.positive_int("pairs", cfg.pairs);
    if (kind == "coupling_alpha") {
      if (auto v = params.real("epsilon")) {
        if (!(*v > 0.0)) params.error("epsilon", "must be positive");
        else cfg.epsilon = *v;
      }
      if (auto v = params.string("coupling")) {
        if (*v == "synchronous") cfg.coupling = CouplingKind::synchronous;
        else if (*v == "independent") cfg.coupling = CouplingKind::independent;
        else params.error("coupling", "expected \"synchronous\" or \"independent\"");
      }
      params.assign("doubled_horizon", cfg.doubled_horizon, params.boolean("doubled_horizon"));
    }
  } else if (kind == "gamma_ergodicity") {
    params.positive_int("batches", cfg.batches, 2);
  }
  params.done();

  Section out(root["output"].as_table(), "output", source, errors, exp.line());
  if (auto v = out.string("dir")) cfg.output.dir = *v;
  if (auto v = out.node("formats")) {
    const auto* arr = v->as_array();
    cfg.output.csv = cfg.output.json = false;
    bool ok = arr != nullptr;
    if (arr)
      for (const auto& item : *arr) {
        const auto s = item.value_exact<std::string>();
        if (s && *s == "csv") cfg.output.csv = true;
        else if (s && *s == "json") cfg.output.json = true;
        else ok = false;
      }
    if (!ok) out.error("formats", "expected an array drawn from \"csv\", \"json\"");
  }
  out.assign("plot", cfg.output.plot, out.boolean("plot"));
  out.done();

  for (const auto& [key, value] : root) {
    const std::string k(key.str());
    if (k != "experiment" && k != "model" && k != "params" && k != "output")
      errors.push_back(source + ':' + std::to_string(line_of(&value, 1)) + ": unknown table [" + k + "]");
  }

  // Cross-field checks.
  if (errors.empty() && kind_it != catalog.end()) {
    if (!among(id, kind_it->models))
      model.error("id", "model '" + id + "' cannot be used with kind '" + kind + "' (expected one of " +
                            listing(kind_it->models) + ")");
    else check_model(model, cfg.model);
    const bool needs_horizon = kind == "conditional_inheritance" || kind == "filter_stability" ||
                               kind == "coupling_alpha" || kind == "gamma_ergodicity";
    if (needs_horizon && cfg.horizon == 0) exp.error("", "missing required field 'horizon'");
    if (kind == "coupling_alpha" && cfg.horizon < 2) exp.error("horizon", "must be >= 2");
    if (kind == "conditional_inheritance") {
      const int margin = default_margin(cfg.horizon);
      for (int lag : cfg.lags)
        if (lag < 0 || lag > cfg.horizon - margin)
          params.error("lags", "lag " + std::to_string(lag) + " outside [0, horizon - horizon/4 = " +
                                   std::to_string(cfg.horizon - margin) + "]");
    }
    if (kind == "gamma_ergodicity" && cfg.horizon < cfg.batches)
      exp.error("horizon", "needs at least one step per batch");
    if ((kind == "zero_two" || kind == "local_mixing") && !cfg.identity_projection && errors.empty()) {
      const int d = id == "product_flip" ? std::get<FixtureParams>(cfg.model.params).d : 1;
      for (int c : cfg.coords)
        if (c < 0 || c >= d) params.error("coords", "coordinate " + std::to_string(c) + " out of range");
      if (kind == "zero_two" && id != "product_flip")
        params.error("coords", "coordinate projections need the product_flip model");
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

const std::vector<ExperimentKind>& experiment_catalog() {
  static const std::vector<ExperimentKind> catalog{
      {"zero_two", "local zero-two law probe: max-pair path TV trace and verdict",
       kChainFixtures, {"coords", "n_max", "k_max", "alpha"}},
      {"local_mixing", "zero-two probe on coordinates of a product chain, with the full-chain contrast",
       {"product_flip"}, {"coords", "n_max", "k_max", "alpha"}},
      {"beta_decay", "absolute regularity coefficient beta(n)", kChainFixtures, {"n_max"}},
      {"conditional_inheritance", "conditional TV of the hidden chain given observation paths",
       kHmmFixtures, {"paths", "lags"}},
      {"filter_stability", "distance between filters started from different priors",
       join({kHmmFixtures, kContinuous}),
       {"particles", "resample_threshold", "record_every", "prior_shift", "coupled_resampling", "ratio_threshold"}},
      {"coupling_alpha", "coupling success probability from the tail sum of squared distances", kContinuous,
       {"pairs", "epsilon", "coupling", "doubled_horizon"}},
      {"hellinger_check", "Hellinger-Lipschitz constant of Gaussian observation densities",
       {"heat", "navier_stokes", "delay"}, {"pairs"}},
      {"gamma_ergodicity", "time averages of the filter chain from two initializations", kHmmFixtures,
       {"batches"}},
  };
  return catalog;
}

}  // namespace ergolab
