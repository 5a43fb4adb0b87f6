#pragma once

// Experiment configuration: a YAML tree read into typed specs. Unknown keys
// and invalid values are errors carrying the line of the offending node.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "codim/measure.hpp"

namespace codim {

/// Invalid configuration; `line` is 1-based (0 when not tied to a node).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct GraphSpec {
  std::string primitive = "sinusoid";  ///< affine | sinusoid | sawtooth | sampled
  double lambda = 0.1;                 ///< Lipschitz constant (declared for sampled; < 0 measures it).
  double frequency = 2.0;              ///< sinusoid
  double period = 1.0;                 ///< sawtooth
  std::vector<double> slope;           ///< affine: (n-d) x d, row-major
  std::vector<double> offset;          ///< affine: n-d entries
  std::string csv;                     ///< sampled: `x1..xd,F1..F(n-d)` file, relative to the config
};

struct GeometrySpec {
  BoundaryKind kind = BoundaryKind::FlatPlane;
  int n = 3;
  int d = 1;
  GraphSpec graph;
  BoundaryOptions boundary;
};

struct OperatorSpec {
  WeightVariant variant = WeightVariant::Smoothed;
  double alpha = 1.0;
};

struct ToleranceSpec {
  double solver = 1e-8;
  int max_iterations = 50000;
  double harnack_c = 1e-2;
};

struct WalkerSpec {
  size_t paths = 100000;
  WalkerParams params;
};

/// Boundary data of a solve: constant, or the mollified indicator of a box or
/// ball in parameter space. Outer data are the half-space Poisson extension.
struct DataSpec {
  enum class Kind { Constant, Box, Ball } kind = Kind::Constant;
  double value = 1.0;
  Vec lo, hi;
  Vec center;
  double radius = 0.0;
};

struct PartitionSpec {
  Vec lo, hi;
  int cells = 16;  ///< Per axis.
};

enum class Suite { Flat, Graph, All };
const char* to_string(Suite s);

struct ExperimentSpec {
  enum class Kind { Solve, Walk, Measure, Diagnose, Verify } kind = Kind::Solve;
  std::string name;
  int line = 0;
  Vec base_point;
  // solve, diagnose (default for diagnose: the box [-1, 1]^d)
  DataSpec data;
  bool write_field = true;
  std::vector<Vec> probes;
  // walk, measure
  size_t paths = 0;  ///< 0: walker.paths
  bool write_paths = true;
  // measure, diagnose
  PartitionSpec partition;
  std::vector<std::string> routes;  ///< solver | walker
  Normalization normalization = Normalization::AllPaths;
  // diagnose
  std::vector<std::string> checks;
  // verify
  Suite suite = Suite::All;
};
const char* to_string(ExperimentSpec::Kind k);

/// Settings of the acceptance suite that are not shared with the experiments.
struct VerifySpec {
  GraphSpec graph;  ///< Graph geometry of the GRAPH rows.
  size_t graph_paths = 10000;
  double graph_dt0 = 0.01;
  size_t min_paths = 10000;  ///< Statistical rows with fewer paths are UNDERPOWERED.
};

struct ExperimentConfig {
  std::string path;    ///< Source file ("" for configs built in code).
  std::string source;  ///< Raw text, hashed into the manifest.
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  GeometrySpec geometry;
  OperatorSpec op;
  GridSpec grid;
  ToleranceSpec tolerances;
  WalkerSpec walker;
  double eta = 1.0 / 64.0;  ///< Mollification width of indicator data.
  VerifySpec verify;
  std::vector<ExperimentSpec> experiments;
};

ExperimentConfig parse_config(const std::string& text, const std::string& path = "");
ExperimentConfig load_config(const std::string& path);
/// Checks the cross-field invariants (d < n-1, eps_abs >= 2h, positive
/// tolerances). Called by the parsers.
void validate_config(const ExperimentConfig& config);

std::shared_ptr<const GraphFunction> make_graph_function(const GeometrySpec& geometry, const std::string& base_dir);
BoundarySet make_boundary(const GeometrySpec& geometry, const std::string& base_dir = ".");
BoundaryData make_data(const DataSpec& data, double eta);

}  // namespace codim
