#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "nrc/config.hpp"
#include "nrc/errors.hpp"

using namespace nrc;

TEST_CASE("parse_config_text") {
  const KeyMap keys = parse_config_text(R"(
# comment
[graph]
kind = ring   # trailing comment
agents = 12

[algorithm]
name = "fnrc"
epsilon = 0.25
[montecarlo]
sigmas = [0, 0.001, 0.1]
)");
  CHECK(keys.at("graph.kind") == "ring");
  CHECK(keys.at("graph.agents") == "12");
  CHECK(keys.at("algorithm.name") == "fnrc");
  CHECK(keys.at("montecarlo.sigmas") == "0,0.001,0.1");

  const ExperimentConfig cfg = config_from_keys(keys);
  CHECK(cfg.graph.agents == 12);
  CHECK(cfg.algorithm.algorithm == Algorithm::Fnrc);
  CHECK(cfg.algorithm.epsilon == 0.25);
  CHECK(cfg.montecarlo.sigmas == std::vector<double>{0.0, 0.001, 0.1});

  CHECK_THROWS_AS(parse_config_text("[graph\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("agents 12\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("x = [1, 2\n"), ConfigError);
}

TEST_CASE("bad keys and values") {
  CHECK_THROWS_AS(config_from_keys({{"graph.colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"graph.agents", "many"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"graph.agents", "0"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"graph.kind", "torus"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"algorithm.name", "sgd"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"init.registers_from_x0", "maybe"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"graph.seed", "-3"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"run.rounds", "0"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"compare.threshold", "0"}}), ConfigError);
}

TEST_CASE("config keys round trip") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const ExperimentConfig cfg = config_from_keys(preset(name));
    const KeyMap keys = config_to_keys(cfg);
    CHECK(config_to_keys(config_from_keys(keys)) == keys);
    CHECK(parse_config_text(format_config(keys)) == keys);
  }

  ExperimentConfig odd;
  odd.algorithm.epsilon = 0.1 + 0.2;
  odd.init.sigma = 1.0 / 3.0;
  odd.oracle = Vec::Constant(2, 1.0 / 7.0);
  const ExperimentConfig back = config_from_keys(config_to_keys(odd));
  CHECK(back.algorithm.epsilon == odd.algorithm.epsilon);
  CHECK(back.init.sigma == odd.init.sigma);
  REQUIRE(back.oracle.has_value());
  CHECK(*back.oracle == *odd.oracle);
}

TEST_CASE("presets") {
  CHECK_THROWS_AS(preset("nope"), ConfigError);

  const ExperimentConfig fig1 = config_from_keys(preset("fig1"));
  CHECK(fig1.graph.kind == GraphKind::Ring);
  CHECK(fig1.graph.agents == 30);
  CHECK(fig1.graph.matrix == MatrixKind::PaperRing);
  CHECK(fig1.costs.kind == CostKind::Exponential);
  CHECK(fig1.algorithm.epsilon == 0.1);

  const ExperimentConfig fig2b = config_from_keys(preset("fig2b"));
  CHECK(fig2b.algorithm.epsilon == 0.01);
  CHECK(fig2b.init.registers_from_x0);
  CHECK(fig2b.montecarlo.sigmas == std::vector<double>{0.0, 0.001, 0.01, 0.1});

  const ExperimentConfig q = config_from_keys(preset("quadratic-eps1"));
  CHECK(q.costs.kind == CostKind::Quadratic);
  CHECK(q.algorithm.epsilon == 1.0);
}

TEST_CASE("metadata json is accepted as a config") {
  const std::string path = "test_config_metadata.json";
  {
    std::ofstream os(path);
    os << R"({"command": "run", "config": {"graph.agents": "9", "algorithm.epsilon": "0.5"}})";
  }
  const KeyMap keys = read_config_file(path);
  CHECK(keys.at("graph.agents") == "9");
  CHECK(config_from_keys(keys).algorithm.epsilon == 0.5);
  {
    std::ofstream os(path);
    os << R"({"command": "run"})";
  }
  CHECK_THROWS_AS(read_config_file(path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_config_file("no_such_config.toml"), ConfigError);
}
