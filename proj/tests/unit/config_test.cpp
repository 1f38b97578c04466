#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lrmvdr/config.hpp"
#include "lrmvdr/error.hpp"

using namespace lrmvdr;

TEST_CASE("defaults follow the published setup") {
  const auto c = default_config(ExperimentKind::Beampattern);
  CHECK(c.alpha == 0.99);
  CHECK(c.rank_k == 10);
  CHECK(c.scenario.window_m == 1000);
  CHECK(c.scenario.sinr_db == -10.0);
  CHECK(c.scenario.doa_drift_deg == 0.01);
  CHECK(c.scenario.doa_min_deg == -30.0);
  CHECK(c.scenario.doa_max_deg == 30.0);
  CHECK(c.m_list == std::vector<int>{50, 75, 100});
  CHECK(c.l_list == std::vector<int>{1, 2, 3});
  CHECK(c.mlw_rule == MainLobeRule::HalfPower);
  CHECK(c.sinr_denominator == SinrDenominator::TotalCovariance);
  CHECK(c.diagonal_loading == 0.0);

  const auto t = default_config(ExperimentKind::Timing);
  CHECK(t.m_list.front() == 10);
  CHECK(t.m_list.back() == 500);
  CHECK(t.timing.warmup_steps == 100);
  CHECK(t.timing.steps == 10000);

  const auto g = default_config(ExperimentKind::SinrGain);
  CHECK(g.m_list == std::vector<int>{100});
  CHECK(g.n_steps == 100000);
  CHECK(g.reinit_step == 50000);
  CHECK(g.trials == 10);

  const auto f = default_config(ExperimentKind::FailureMode);
  CHECK(f.m_list == std::vector<int>{50});
  CHECK(f.high_snr_db == 10.0);
}

TEST_CASE("parse overrides and keeps other defaults") {
  const auto c = parse_config(R"({
    // comments are allowed
    "experiment": "sinr-gain",
    "seed": 42,
    "M": [64],
    "n_steps": 5000,
    "reinit_step": 3000,
    "engine": "lowrank",
    "scenario": {"doa_drift_deg_per_1000": 0.05, "doa_range_deg": [-20, 20]},
    "metrics": {"sinr_denominator": "interference-plus-noise", "mlw_rule": "null-to-null"},
    "sinr_gain": {"zero_drift_control": false}
  })");
  CHECK(c.experiment == ExperimentKind::SinrGain);
  CHECK(c.seed == 42);
  CHECK(c.m_list == std::vector<int>{64});
  CHECK(c.reinit_step == 3000);
  CHECK(c.engines == EngineSelection::LowRank);
  CHECK(c.scenario.doa_drift_deg == 0.05);
  CHECK(c.scenario.doa_min_deg == -20.0);
  CHECK(c.sinr_denominator == SinrDenominator::InterferencePlusNoise);
  CHECK(c.mlw_rule == MainLobeRule::NullToNull);
  CHECK_FALSE(c.zero_drift_control);
  CHECK(c.trials == 10);
  CHECK(c.alpha == 0.99);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"M": [50]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "nope"})"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "beampattern", "Mlist": [3]})"),
                       doctest::Contains("unknown config key"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "scenario": {"window": 3}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "alpha": 1.0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "trials": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "n_steps": 10})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "M": [8]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "K": "ten"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "beampattern", "engine": "fast"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "sinr-gain", "reinit_step": 100})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "timing"})", ExperimentKind::Beampattern),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("experiment kind can come from the caller") {
  const auto c = parse_config(R"({"trials": 2})", ExperimentKind::FailureMode);
  CHECK(c.experiment == ExperimentKind::FailureMode);
  CHECK(c.trials == 2);
}

TEST_CASE("names round trip") {
  for (auto k : {ExperimentKind::Beampattern, ExperimentKind::Timing, ExperimentKind::SinrGain,
                 ExperimentKind::FailureMode}) {
    CHECK(parse_experiment(to_string(k)) == k);
  }
  for (auto e : {EngineSelection::Exact, EngineSelection::LowRank, EngineSelection::Both}) {
    CHECK(parse_engine_selection(to_string(e)) == e);
  }
  CHECK(runs_engine(EngineSelection::Both, Engine::Exact));
  CHECK_FALSE(runs_engine(EngineSelection::LowRank, Engine::Exact));
}

TEST_CASE("config hash is stable and sensitive") {
  auto a = default_config(ExperimentKind::Beampattern);
  auto b = a;
  b.output_dir = "somewhere/else";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.scenario.snr_db += 1e-9;
  CHECK(config_hash(a) != config_hash(b));

  // canonical JSON re-parses to the same config
  const auto c = parse_config(canonical_json(a));
  CHECK(config_hash(c) == config_hash(a));
}

TEST_CASE("load_config reads a file") {
  const auto path = std::filesystem::temp_directory_path() / "lrmvdr_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"experiment": "timing", "M": [10, 20], "timing": {"steps": 50}})";
  }
  const auto c = load_config(path);
  CHECK(c.experiment == ExperimentKind::Timing);
  CHECK(c.timing.steps == 50);
  std::filesystem::remove(path);
}
