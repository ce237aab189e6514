#pragma once

// Config-driven experiments: TOML parsing and validation, execution, and the
// CSV / JSON / SVG outputs written by the command line tool.

#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/coupling.hpp"
#include "ergolab/filter.hpp"
#include "ergolab/models/delay.hpp"
#include "ergolab/models/heat.hpp"
#include "ergolab/models/navier_stokes.hpp"
#include "ergolab/models/spin.hpp"

namespace ergolab {

/// A config problem; `messages` are "file:line: text" strings.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> messages);
  std::vector<std::string> messages;
};

struct FixtureParams {
  double p = 0.25;    ///< two_state_flip, product_flip
  int d = 3;          ///< product_flip
  double eps = 0.01;  ///< revealing_hmm
};

struct ModelConfig {
  std::string id;
  std::variant<FixtureParams, HeatParams, NSParams, SpinParams, DelayParams> params;
};

struct OutputConfig {
  std::optional<std::string> dir;
  bool csv = true;
  bool json = true;
  bool plot = false;
};

struct ExperimentConfig {
  std::string source;  ///< file the config was read from
  std::string kind;
  std::string name;
  std::uint64_t seed = 0;
  int replicas = 1;
  int horizon = 0;
  int threads = 1;
  ModelConfig model;

  // zero_two, local_mixing, beta_decay
  std::vector<int> coords;
  bool identity_projection = true;
  int n_max = 10;
  int k_max = 6;
  double alpha = 0.5;
  // conditional_inheritance
  int paths = 50;
  std::vector<int> lags;
  // filter_stability
  ParticleConfig particles;
  int record_every = 1;
  double prior_shift = 5.0;
  bool coupled_resampling = true;
  std::optional<double> ratio_threshold;
  // coupling_alpha, hellinger_check
  int pairs = 10;
  double epsilon = 1e-6;
  CouplingKind coupling = CouplingKind::synchronous;
  bool doubled_horizon = false;
  // gamma_ergodicity
  int batches = 50;

  OutputConfig output;
};

/// Parses and fully validates a config (schema, ranges, model construction).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source);

struct Record {
  int replica = 0;
  int step = 0;
  std::string metric;
  double value = 0.0;
  std::string meta;
};

struct ExperimentOutput {
  std::vector<Record> records;  ///< canonical order: by replica, then step, then insertion
  nlohmann::json summary;
};

/// Runs the experiment. Results depend only on the config (threads change speed only).
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Long-format CSV: experiment,replica,step,metric,value,meta with %.17g values.
std::string to_csv(const std::string& experiment, const std::vector<Record>& records);
/// Line chart of one metric, one polyline per replica.
std::string to_svg(const std::string& title, const std::vector<Record>& records, const std::string& metric);

struct ExperimentKind {
  std::string name;
  std::string description;
  std::vector<std::string> models;
  std::vector<std::string> parameters;
};
const std::vector<ExperimentKind>& experiment_catalog();

/// Builds the state-space model named by a config (heat, navier_stokes, spin, delay).
std::unique_ptr<StateSpaceModel> make_model(const ModelConfig& config);

/// Runs `fn(i)` for i in [0, count) on up to `threads` threads.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace ergolab
