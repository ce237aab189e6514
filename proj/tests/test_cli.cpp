#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "ergolab/experiment.hpp"

using namespace ergolab;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(ERGOLAB_SOURCE_DIR) + "/configs/" + name; }

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text, "test.toml");
  } catch (const ConfigError& e) {
    return e.messages;
  }
  return {};
}

bool any_contains(const std::vector<std::string>& messages, const std::string& needle) {
  for (const auto& m : messages)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("shipped configs validate") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(std::string(ERGOLAB_SOURCE_DIR) + "/configs")) {
    if (entry.path().extension() != ".toml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++count;
  }
  CHECK(count >= 8);
  const auto cfg = load_config(config_path("filter_mixing3.toml"));
  CHECK(cfg.name == "filter_mixing3");
  CHECK(cfg.kind == "filter_stability");
  CHECK(cfg.seed == 3);
}

TEST_CASE("config errors are line anchored and name the field") {
  const auto missing_seed = errors_of("[experiment]\nkind = \"zero_two\"\n\n[model]\nid = \"periodic2\"\n");
  REQUIRE_FALSE(missing_seed.empty());
  CHECK(any_contains(missing_seed, "seed"));
  CHECK(any_contains(missing_seed, "test.toml:"));

  const auto unknown = errors_of("[experiment]\nkind = \"zero_two\"\nseed = 1\ncolour = 3\n\n[model]\nid = \"periodic2\"\n");
  CHECK(any_contains(unknown, "test.toml:4:"));
  CHECK(any_contains(unknown, "colour"));

  const auto bad_kind = errors_of("[experiment]\nkind = \"nope\"\nseed = 1\n[model]\nid = \"periodic2\"\n");
  CHECK(any_contains(bad_kind, "zero_two"));

  const auto syntax = errors_of("[experiment\nkind = 1\n");
  CHECK(any_contains(syntax, "test.toml:1"));

  const auto forcing = errors_of(
      "[experiment]\nkind = \"coupling_alpha\"\nseed = 1\nhorizon = 10\n[model]\nid = \"navier_stokes\"\n"
      "forcing = [{k = [2, 0], sigma = 1.0}, {k = [-2, 0], sigma = 1.0}]\n");
  CHECK(any_contains(forcing, "integer"));

  const auto mismatch = errors_of("[experiment]\nkind = \"hellinger_check\"\nseed = 1\n[model]\nid = \"spin\"\n");
  CHECK_FALSE(mismatch.empty());

  CHECK_THROWS_AS(load_config(config_path("does_not_exist.toml")), ConfigError);
}

TEST_CASE("zero-two verdicts") {
  const auto periodic = run_experiment(load_config(config_path("zero_two_periodic.toml")));
  CHECK(periodic.summary["verdict"] == "not locally ergodic");
  const auto product = run_experiment(load_config(config_path("zero_two_product.toml")));
  CHECK(product.summary["verdict"] == "locally irreducible");
}

TEST_CASE("filter stability on the mixing fixture writes a long CSV") {
  auto cfg = load_config(config_path("filter_mixing3.toml"));
  cfg.replicas = 4;
  cfg.horizon = 60;
  const auto out = run_experiment(cfg);
  const auto csv = lines(to_csv(cfg.name, out.records));
  REQUIRE(csv.size() == 1 + 4 * 61);
  CHECK(csv[0] == "experiment,replica,step,metric,value,meta");
  CHECK(csv[1].rfind("filter_mixing3,0,0,tv,", 0) == 0);
  CHECK(out.summary["decreasing"] == true);
  CHECK(out.summary["verdict"] == "filter stable");

  // Every row is in canonical (replica, step) order.
  for (std::size_t i = 1; i < out.records.size(); ++i) {
    const auto& a = out.records[i - 1];
    const auto& b = out.records[i];
    CHECK((a.replica < b.replica || (a.replica == b.replica && a.step <= b.step)));
  }

  // The verdict is recomputable from the CSV alone.
  std::vector<StabilityCurve> curves(4, StabilityCurve{"tv", "full", {}, {}});
  for (const auto& r : out.records) {
    curves[static_cast<std::size_t>(r.replica)].steps.push_back(r.step);
    curves[static_cast<std::size_t>(r.replica)].distance.push_back(r.value);
  }
  CHECK(decreasing(median_curve(curves)) == out.summary["decreasing"].get<bool>());

  const auto svg = to_svg("mixing", out.records, "tv");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("output is independent of the thread count") {
  for (const auto* name : {"filter_mixing3.toml", "coupling_spin.toml", "conditional_mixing3.toml"}) {
    auto cfg = load_config(config_path(name));
    cfg.replicas = std::min(cfg.replicas, 6);
    if (cfg.kind != "conditional_inheritance") cfg.horizon = std::min(cfg.horizon, 60);
    cfg.threads = 1;
    const auto one = run_experiment(cfg);
    cfg.threads = 8;
    const auto eight = run_experiment(cfg);
    CAPTURE(name);
    CHECK(to_csv(cfg.name, one.records) == to_csv(cfg.name, eight.records));
    CHECK(one.summary.dump() == eight.summary.dump());
  }
}

TEST_CASE("catalog and thread pool") {
  const auto& catalog = experiment_catalog();
  std::set<std::string> kinds;
  for (const auto& k : catalog) kinds.insert(k.name);
  CHECK(kinds == std::set<std::string>{"zero_two", "local_mixing", "beta_decay", "conditional_inheritance",
                                       "filter_stability", "coupling_alpha", "hellinger_check", "gamma_ergodicity"});

  std::vector<int> hits(100, 0);
  parallel_for(100, 7, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(3, 2, [](int i) {
    if (i == 1) throw std::runtime_error("boom");
  }));
}

TEST_CASE("csv formatting") {
  const std::vector<Record> records{{0, 1, "tv", 0.1, ""}, {1, 0, "bl", 1.0 / 3.0, "a=b"}};
  const auto csv = lines(to_csv("x", records));
  CHECK(csv[1] == "x,0,1,tv,0.10000000000000001,");
  CHECK(csv[2] == "x,1,0,bl,0.33333333333333331,a=b");
}
