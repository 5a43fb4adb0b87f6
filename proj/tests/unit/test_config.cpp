#include <gtest/gtest.h>

#include <string>

#include "codim/config.hpp"

namespace codim {
namespace {

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text, "c.yaml");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "config parsed without error:\n" << text;
  return ConfigError("", -1);
}

bool contains(const ConfigError& e, const std::string& s) { return std::string(e.what()).find(s) != std::string::npos; }

TEST(Config, DefaultsFromMinimalText) {
  const ExperimentConfig c = parse_config("seed: 7\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.geometry.n, 3);
  EXPECT_EQ(c.geometry.d, 1);
  EXPECT_EQ(c.geometry.kind, BoundaryKind::FlatPlane);
  EXPECT_DOUBLE_EQ(c.eta, 1.0 / 64.0);
  EXPECT_EQ(c.walker.paths, 100000u);
  EXPECT_TRUE(c.experiments.empty());
  EXPECT_EQ(c.source, "seed: 7\n");
}

TEST(Config, FractionsAndDecimals) {
  const ExperimentConfig c = parse_config("grid:\n  half_width: 2\n  spacing: 1/32\nmeasure:\n  eta: 0.03125\n");
  EXPECT_DOUBLE_EQ(c.grid.spacing, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(c.eta, 1.0 / 32.0);
}

TEST(Config, BadFractionReportsLine) {
  const ConfigError e = error_of("seed: 1\ngrid:\n  spacing: 1/0\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_TRUE(contains(e, "c.yaml:3:"));
  EXPECT_TRUE(contains(e, "fraction"));
}

TEST(Config, UnknownKeyReportsLineAndSection) {
  const ConfigError e = error_of("seed: 1\nwalker:\n  paths: 10\n  stepsize: 0.1\n");
  EXPECT_EQ(e.line(), 4);
  EXPECT_TRUE(contains(e, "unknown key 'stepsize' in 'walker'"));
}

TEST(Config, UnknownRootKey) {
  const ConfigError e = error_of("seed: 1\nsolver: {}\n");
  EXPECT_EQ(e.line(), 2);
  EXPECT_TRUE(contains(e, "unknown key 'solver'"));
}

TEST(Config, YamlSyntaxErrorReportsLine) {
  const ConfigError e = error_of("seed: 1\ngrid:\n  spacing: [1, 2\n");
  EXPECT_GT(e.line(), 0);
}

TEST(Config, CodimensionOneRejected) {
  const ConfigError e = error_of("geometry:\n  n: 3\n  d: 2\n");
  EXPECT_TRUE(contains(e, "constraint d < n-1 violated (d = 2, n = 3)"));
  EXPECT_TRUE(contains(e, "codimension > 1"));
}

TEST(Config, CodimensionTwoInFourDimensionsAccepted) {
  const ExperimentConfig c = parse_config("geometry:\n  n: 4\n  d: 2\n");
  EXPECT_EQ(c.geometry.n, 4);
  EXPECT_EQ(c.geometry.d, 2);
}

TEST(Config, TubeBelowTwoSpacingsRejected) {
  const ConfigError e = error_of("grid:\n  half_width: 2\n  spacing: 1/16\n  eps_abs: 0.1\n");
  EXPECT_EQ(e.line(), 4);
  EXPECT_TRUE(contains(e, "constraint eps_abs >= 2h violated"));
  EXPECT_NO_THROW(parse_config("grid:\n  half_width: 2\n  spacing: 1/16\n  eps_abs: 1/8\n"));
}

TEST(Config, EnumChoicesListed) {
  const ConfigError e = error_of("operator:\n  variant: exact\n");
  EXPECT_EQ(e.line(), 2);
  EXPECT_TRUE(contains(e, "smoothed, geometric"));
}

TEST(Config, GraphGeometryNeedsGraphSection) {
  const ConfigError e = error_of("geometry:\n  kind: graph\n");
  EXPECT_TRUE(contains(e, "needs a 'graph' section"));
  const ExperimentConfig c =
      parse_config("geometry:\n  kind: graph\n  graph:\n    primitive: sawtooth\n    lambda: 0.2\n    period: 1/2\n");
  EXPECT_EQ(c.geometry.kind, BoundaryKind::LipschitzGraph);
  EXPECT_EQ(c.geometry.graph.primitive, "sawtooth");
  EXPECT_DOUBLE_EQ(c.geometry.graph.period, 0.5);
}

TEST(Config, ExperimentsParsedInOrder) {
  const ExperimentConfig c = parse_config(R"(experiments:
  - kind: solve
    name: box
    data: {kind: box, lo: [-1], hi: [1]}
    probes: [[0, 0, 1]]
  - kind: walk
    base_point: [0, 0, 1]
    paths: 50
  - kind: diagnose
    checks: [doubling, carleson]
  - kind: verify
    suite: flat
)");
  ASSERT_EQ(c.experiments.size(), 4u);
  EXPECT_EQ(c.experiments[0].name, "box");
  EXPECT_EQ(c.experiments[0].data.kind, DataSpec::Kind::Box);
  ASSERT_EQ(c.experiments[0].probes.size(), 1u);
  EXPECT_EQ(c.experiments[1].kind, ExperimentSpec::Kind::Walk);
  EXPECT_EQ(c.experiments[1].name, "walk_1");
  EXPECT_EQ(c.experiments[1].paths, 50u);
  EXPECT_EQ(c.experiments[2].checks.size(), 2u);
  EXPECT_EQ(c.experiments[3].suite, Suite::Flat);
}

TEST(Config, ExperimentErrors) {
  EXPECT_TRUE(contains(error_of("experiments:\n  - kind: solve\n"), "solve needs 'data'"));
  EXPECT_TRUE(contains(error_of("experiments:\n  - kind: walk\n    name: Bad Name\n"), "[a-z0-9_-]"));
  EXPECT_TRUE(contains(error_of("experiments:\n  - {kind: walk, name: a}\n  - {kind: walk, name: a}\n"),
                       "duplicate experiment name 'a'"));
  EXPECT_TRUE(contains(error_of("experiments:\n  - kind: diagnose\n    checks: [bogus]\n"), "bogus"));
  const ConfigError wrong_dim = error_of("experiments:\n  - kind: walk\n    base_point: [0, 1]\n");
  EXPECT_EQ(wrong_dim.line(), 3);
  EXPECT_TRUE(contains(wrong_dim, "3 entries"));
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Config, DataBuiltFromSpec) {
  const ExperimentConfig c = parse_config(
      "experiments:\n  - kind: solve\n    data: {kind: box, lo: [-1], hi: [1]}\n");
  const BoundaryData g = make_data(c.experiments[0].data, c.eta);
  EXPECT_NEAR(g(Vec{0.0}), 1.0, 1e-12);
  EXPECT_NEAR(g(Vec{1.5}), 0.0, 1e-12);
  EXPECT_NEAR(g(Vec{1.0}), 0.5, 1e-6);
}

}  // namespace
}  // namespace codim
