#include <doctest.h>

#include <json.hpp>

#include "hermlab/config.hpp"
#include "hermlab/records.hpp"

using namespace hermlab;

TEST_CASE("config text parsing") {
  const std::string text = R"(
# comment
[experiment]
kind = decay-scan
ensemble = 32   ; trailing comment

[galerkin]
p = 3
n_modes = 48
)";
  const ConfigMap map = parse_config_text(text);
  CHECK(map.at("experiment.kind") == "decay-scan");
  CHECK(map.at("experiment.ensemble") == "32");
  CHECK(map.at("galerkin.p") == "3");

  CHECK_THROWS_AS(parse_config_text("key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[a\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[a]\nnokey\n"), std::invalid_argument);
}

TEST_CASE("config round trip is lossless") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Scatter;
  cfg.galerkin.p = 4.75;
  cfg.galerkin.dt0 = 1.25e-4;
  cfg.measure.free_time = 0.1234567890123456;
  cfg.measure_ratio.t_grid = {0.0, 0.1, 0.22};
  cfg.master_seed = 18446744073709551615ull;

  const ExperimentConfig back =
      ExperimentConfig::from_map(parse_config_text(cfg.canonical_text()));
  CHECK(back.to_map() == cfg.to_map());
  CHECK(back.content_hash() == cfg.content_hash());
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.galerkin.p == cfg.galerkin.p);
  CHECK(back.measure.free_time == cfg.measure.free_time);
  REQUIRE(back.measure_ratio.t_grid.size() == 3);
  CHECK(back.measure_ratio.t_grid[2] == 0.22);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_map({{"experiment.kindd", "sample"}}),
      "unknown config key: experiment.kindd", std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_map({{"galerkin.p", "fast"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_map({{"experiment.kind", "turbo"}}),
                  std::invalid_argument);
}

TEST_CASE("overrides") {
  ExperimentConfig cfg;
  cfg.apply_override("galerkin.p=3.5");
  CHECK(cfg.galerkin.p == 3.5);
  cfg.apply_override("measure_ratio.t_grid = 0, 0.2, 0.4");
  CHECK(cfg.measure_ratio.t_grid.size() == 3);
  CHECK_THROWS_AS(cfg.apply_override("no_equals"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("galerkin.warp=1"),
                  std::invalid_argument);
}

TEST_CASE("experiment kind names") {
  for (ExperimentKind kind :
       {ExperimentKind::Sample, ExperimentKind::Evolve,
        ExperimentKind::DecayScan, ExperimentKind::Scatter,
        ExperimentKind::MeasureRatio, ExperimentKind::Diagnostics}) {
    CHECK(experiment_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(experiment_kind_from_string("none"), std::invalid_argument);
}

TEST_CASE("record lines") {
  RunRecord r;
  r.experiment = "decay-scan";
  r.sample = 3;
  r.t = 0.25;
  r.s = 0.5 + 1e-17;
  r.observable = "nls_lq";
  r.value = 1.0 / 3.0;
  r.seed = 42;
  r.config_hash = "deadbeef";

  const std::string line = r.to_json_line();
  // fixed key order, floats at 17 significant digits
  CHECK(line.find("\"experiment\":\"decay-scan\"") == 1);
  CHECK(line.find("\"value\":0.33333333333333331") != std::string::npos);
  CHECK(line.find("\"flags\":[]") != std::string::npos);

  const auto parsed = nlohmann::json::parse(line);
  CHECK(parsed["sample"] == 3);
  CHECK(parsed["value"].get<double>() == 1.0 / 3.0);
  CHECK(parsed["config"] == "deadbeef");

  SUBCASE("nonfinite values serialize as null with a flag") {
    r.value = std::numeric_limits<double>::quiet_NaN();
    const auto bad = nlohmann::json::parse(r.to_json_line());
    CHECK(bad["value"].is_null());
    CHECK(bad["flags"][0] == "nonfinite");
  }
  SUBCASE("absent times serialize as null") {
    r.t.reset();
    r.s.reset();
    const auto notime = nlohmann::json::parse(r.to_json_line());
    CHECK(notime["t"].is_null());
  }
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
