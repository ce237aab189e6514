// Command line front end: validate, run and list experiments.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ergolab/experiment.hpp"

namespace fs = std::filesystem;
using namespace ergolab;

namespace {

constexpr int kOk = 0, kRuntimeFailure = 1, kConfigFailure = 2;

int report_config_error(const ConfigError& e) {
  for (const auto& m : e.messages) std::cerr << m << '\n';
  return kConfigFailure;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

fs::path output_dir(const ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (cfg.output.dir) return *cfg.output.dir;
  if (const char* env = std::getenv("ERGOLAB_OUT"); env && *env) return env;
  return "ergolab-out";
}

int cmd_validate(const std::string& path) {
  try {
    const auto cfg = load_config(path);
    std::cout << path << ": ok (" << cfg.kind << " on " << cfg.model.id << ")\n";
    return kOk;
  } catch (const ConfigError& e) {
    return report_config_error(e);
  }
}

struct RunFlags {
  std::string config, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool plot = false;
};

int cmd_run(const RunFlags& flags) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(flags.config);
  } catch (const ConfigError& e) {
    return report_config_error(e);
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.threads) cfg.threads = *flags.threads;
  if (flags.plot) cfg.output.plot = true;
  if (flags.format == "csv") cfg.output.csv = true, cfg.output.json = false;
  if (flags.format == "json") cfg.output.csv = false, cfg.output.json = true;

  try {
    const auto result = run_experiment(cfg);
    const fs::path dir = output_dir(cfg, flags.out);
    fs::create_directories(dir);
    if (cfg.output.csv) write_file(dir / (cfg.name + ".csv"), to_csv(cfg.name, result.records));
    if (cfg.output.json) write_file(dir / (cfg.name + ".json"), result.summary.dump(2) + "\n");
    if (cfg.output.plot && result.summary.contains("plot_metric")) {
      const std::string metric = result.summary["plot_metric"];
      write_file(dir / (cfg.name + ".svg"), to_svg(cfg.name + ": " + metric, result.records, metric));
    }
    std::cout << cfg.name << ": " << result.summary.value("verdict", std::string("done")) << " (" << dir.string()
              << ")\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << cfg.name << ": run failed: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

int cmd_list(const std::string& format) {
  const auto& catalog = experiment_catalog();
  if (format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : catalog)
      out.push_back({{"kind", k.name}, {"description", k.description}, {"models", k.models},
                     {"parameters", k.parameters}});
    std::cout << out.dump(2) << '\n';
    return kOk;
  }
  for (const auto& k : catalog) {
    std::cout << k.name << "\n  " << k.description << "\n  models:";
    for (const auto& m : k.models) std::cout << ' ' << m;
    std::cout << "\n  [params]:";
    for (const auto& p : k.parameters) std::cout << ' ' << p;
    std::cout << '\n';
  }
  std::cout << "\nevery config needs [experiment] kind and seed, and [model] id\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergodicity and filter stability experiments"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config,config", validate_path, "TOML config")->required();

  RunFlags flags;
  std::uint64_t seed = 0;
  int threads = 1;
  auto* run = app.add_subcommand("run", "run an experiment");
  run->add_option("--config,config", flags.config, "TOML config")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* threads_opt = run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", flags.out, "output directory (default: config, then $ERGOLAB_OUT)");
  run->add_option("--format", flags.format, "write only this format")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--plot", flags.plot, "also write an SVG plot");

  std::string list_format = "text";
  auto* list = app.add_subcommand("list", "list experiment kinds and models");
  list->add_option("--format", list_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigFailure;
  }
  if (*seed_opt) flags.seed = seed;
  if (*threads_opt) flags.threads = threads;

  if (*validate) return cmd_validate(validate_path);
  if (*run) return cmd_run(flags);
  return cmd_list(list_format);
}
