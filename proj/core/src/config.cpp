#include "codim/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace codim {

const char* to_string(Suite s) {
  switch (s) {
    case Suite::Flat: return "flat";
    case Suite::Graph: return "graph";
    case Suite::All: return "all";
  }
  return "?";
}

const char* to_string(ExperimentSpec::Kind k) {
  switch (k) {
    case ExperimentSpec::Kind::Solve: return "solve";
    case ExperimentSpec::Kind::Walk: return "walk";
    case ExperimentSpec::Kind::Measure: return "measure";
    case ExperimentSpec::Kind::Diagnose: return "diagnose";
    case ExperimentSpec::Kind::Verify: return "verify";
  }
  return "?";
}

namespace {

const std::set<std::string> kChecks = {"ellipticity", "ahlfors",         "harnack_chain", "doubling",
                                       "a_infinity",  "square_function", "carleson",      "poincare"};

class Parser {
 public:
  explicit Parser(std::string path) : path_(std::move(path)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const { fail_at(line_of(node), msg); }
  [[noreturn]] void fail_at(int line, const std::string& msg) const {
    const std::string where = path_.empty() ? std::string("<config>") : path_;
    throw ConfigError(line > 0 ? fmt::format("{}:{}: {}", where, line, msg) : fmt::format("{}: {}", where, msg), line);
  }
  static int line_of(const YAML::Node& node) {
    const YAML::Mark m = node.Mark();
    return m.is_null() ? 0 : m.line + 1;
  }

  void expect_map(const YAML::Node& node, const std::string& section,
                  std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", section));
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, section));
    }
  }

  std::string scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", key));
    return node.Scalar();
  }

  /// Decimal number or a fraction `p/q`.
  double number(const YAML::Node& node, const std::string& key) const {
    const std::string s = scalar(node, key);
    auto parse = [&](std::string_view t, double& out) {
      const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
      return r.ec == std::errc() && r.ptr == t.data() + t.size();
    };
    double v = 0.0;
    const size_t slash = s.find('/');
    if (slash == std::string::npos) {
      if (!parse(s, v)) fail(node, fmt::format("'{}' must be a number, got '{}'", key, s));
    } else {
      double p = 0.0, q = 0.0;
      if (!parse(std::string_view(s).substr(0, slash), p) || !parse(std::string_view(s).substr(slash + 1), q) ||
          q == 0.0)
        fail(node, fmt::format("'{}' must be a number or a fraction p/q, got '{}'", key, s));
      v = p / q;
    }
    if (!std::isfinite(v)) fail(node, fmt::format("'{}' must be finite", key));
    return v;
  }

  long long integer(const YAML::Node& node, const std::string& key) const {
    const std::string s = scalar(node, key);
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(node, fmt::format("'{}' must be an integer, got '{}'", key, s));
    return v;
  }

  bool boolean(const YAML::Node& node, const std::string& key) const {
    const std::string s = scalar(node, key);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(node, fmt::format("'{}' must be true or false, got '{}'", key, s));
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, fmt::format("'{}' must be a list of numbers", key));
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, key));
    return out;
  }

  Vec vec(const YAML::Node& node, const std::string& key, int size) const {
    const std::vector<double> v = numbers(node, key);
    if (static_cast<int>(v.size()) != size)
      fail(node, fmt::format("'{}' must have {} entries, got {}", key, size, v.size()));
    return Vec(std::span<const double>(v));
  }

  template <typename T>
  T choice(const YAML::Node& node, const std::string& key, std::initializer_list<std::pair<const char*, T>> options) const {
    const std::string s = scalar(node, key);
    std::string names;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(node, fmt::format("'{}' must be one of {}, got '{}'", key, names, s));
  }

  void positive(const YAML::Node& node, const std::string& key, double v) const {
    if (!(v > 0.0)) fail(node, fmt::format("'{}' must be positive", key));
  }

  GraphSpec graph(const YAML::Node& node, const std::string& section) const {
    expect_map(node, section, {"primitive", "lambda", "frequency", "period", "slope", "offset", "csv"});
    GraphSpec g;
    if (node["primitive"]) {
      g.primitive = scalar(node["primitive"], "primitive");
      if (g.primitive != "affine" && g.primitive != "sinusoid" && g.primitive != "sawtooth" && g.primitive != "sampled")
        fail(node["primitive"], fmt::format("'primitive' must be one of affine, sinusoid, sawtooth, sampled, got '{}'",
                                            g.primitive));
    }
    if (node["lambda"]) g.lambda = number(node["lambda"], "lambda");
    if (node["frequency"]) {
      g.frequency = number(node["frequency"], "frequency");
      positive(node["frequency"], "frequency", g.frequency);
    }
    if (node["period"]) {
      g.period = number(node["period"], "period");
      positive(node["period"], "period", g.period);
    }
    if (node["slope"]) g.slope = numbers(node["slope"], "slope");
    if (node["offset"]) g.offset = numbers(node["offset"], "offset");
    if (node["csv"]) g.csv = scalar(node["csv"], "csv");
    if (g.primitive == "sampled" && g.csv.empty()) fail(node, "sampled graph needs 'csv'");
    if (g.primitive != "sampled" && g.primitive != "affine" && g.lambda < 0.0)
      fail(node["lambda"], "'lambda' must be nonnegative");
    return g;
  }

  void geometry(const YAML::Node& node, GeometrySpec& g) const {
    expect_map(node, "geometry", {"kind", "n", "d", "window_radius", "quadrature_spacing", "graph"});
    if (node["kind"])
      g.kind = choice<BoundaryKind>(node["kind"], "kind",
                                    {{"flat", BoundaryKind::FlatPlane}, {"graph", BoundaryKind::LipschitzGraph}});
    if (node["n"]) g.n = static_cast<int>(integer(node["n"], "n"));
    if (node["d"]) g.d = static_cast<int>(integer(node["d"], "d"));
    if (g.n < 3 || g.n > kMaxDim) fail(node["n"], fmt::format("'n' must lie in [3, {}]", kMaxDim));
    if (g.d < 1) fail(node["d"], "'d' must be at least 1");
    if (g.d >= g.n - 1)
      fail(node["d"] ? node["d"] : node,
           fmt::format("constraint d < n-1 violated (d = {}, n = {}): the boundary must have codimension > 1", g.d, g.n));
    if (node["window_radius"]) {
      g.boundary.window_radius = number(node["window_radius"], "window_radius");
      positive(node["window_radius"], "window_radius", g.boundary.window_radius);
    }
    if (node["quadrature_spacing"]) {
      g.boundary.quadrature_spacing = number(node["quadrature_spacing"], "quadrature_spacing");
      positive(node["quadrature_spacing"], "quadrature_spacing", g.boundary.quadrature_spacing);
    }
    if (node["graph"]) g.graph = graph(node["graph"], "geometry.graph");
    if (g.kind == BoundaryKind::LipschitzGraph && !node["graph"]) fail(node, "graph geometry needs a 'graph' section");
  }

  DataSpec data(const YAML::Node& node, int d) const {
    expect_map(node, "data", {"kind", "value", "lo", "hi", "center", "radius"});
    DataSpec s;
    if (!node["kind"]) fail(node, "'data' needs 'kind'");
    s.kind = choice<DataSpec::Kind>(
        node["kind"], "kind",
        {{"constant", DataSpec::Kind::Constant}, {"box", DataSpec::Kind::Box}, {"ball", DataSpec::Kind::Ball}});
    switch (s.kind) {
      case DataSpec::Kind::Constant:
        if (node["value"]) s.value = number(node["value"], "value");
        break;
      case DataSpec::Kind::Box:
        if (!node["lo"] || !node["hi"]) fail(node, "box data needs 'lo' and 'hi'");
        s.lo = vec(node["lo"], "lo", d);
        s.hi = vec(node["hi"], "hi", d);
        for (int k = 0; k < d; ++k)
          if (!(s.lo[k] < s.hi[k])) fail(node, "box data needs lo < hi on every axis");
        break;
      case DataSpec::Kind::Ball:
        if (!node["center"] || !node["radius"]) fail(node, "ball data needs 'center' and 'radius'");
        s.center = vec(node["center"], "center", d);
        s.radius = number(node["radius"], "radius");
        positive(node["radius"], "radius", s.radius);
        break;
    }
    return s;
  }

  PartitionSpec partition(const YAML::Node& node, int d) const {
    expect_map(node, "partition", {"lo", "hi", "cells"});
    PartitionSpec p;
    if (!node["lo"] || !node["hi"]) fail(node, "'partition' needs 'lo' and 'hi'");
    p.lo = vec(node["lo"], "lo", d);
    p.hi = vec(node["hi"], "hi", d);
    for (int k = 0; k < d; ++k)
      if (!(p.lo[k] < p.hi[k])) fail(node, "'partition' needs lo < hi on every axis");
    if (node["cells"]) p.cells = static_cast<int>(integer(node["cells"], "cells"));
    if (p.cells < 1) fail(node["cells"], "'cells' must be at least 1");
    return p;
  }

  ExperimentSpec experiment(const YAML::Node& node, const GeometrySpec& geo, size_t index) const {
    if (!node.IsMap()) fail(node, "each experiment must be a mapping");
    if (!node["kind"]) fail(node, "experiment needs 'kind'");
    ExperimentSpec e;
    e.line = line_of(node);
    using K = ExperimentSpec::Kind;
    e.kind = choice<K>(node["kind"], "kind",
                       {{"solve", K::Solve}, {"walk", K::Walk}, {"measure", K::Measure}, {"diagnose", K::Diagnose},
                        {"verify", K::Verify}});
    switch (e.kind) {
      case K::Solve: expect_map(node, "solve", {"kind", "name", "data", "write_field", "probes"}); break;
      case K::Walk: expect_map(node, "walk", {"kind", "name", "base_point", "paths", "write_paths"}); break;
      case K::Measure:
        expect_map(node, "measure", {"kind", "name", "base_point", "partition", "routes", "normalization", "paths"});
        break;
      case K::Diagnose: expect_map(node, "diagnose", {"kind", "name", "base_point", "partition", "checks", "data"}); break;
      case K::Verify: expect_map(node, "verify", {"kind", "name", "suite"}); break;
    }
    e.name = node["name"] ? scalar(node["name"], "name") : fmt::format("{}_{}", to_string(e.kind), index);
    if (e.name.empty() || e.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_-") != std::string::npos)
      fail(node["name"], "'name' must be nonempty and use only [a-z0-9_-]");
    e.base_point = Vec(geo.n, 0.0);
    e.base_point[geo.n - 1] = 1.0;
    if (node["base_point"]) e.base_point = vec(node["base_point"], "base_point", geo.n);
    e.partition.lo = Vec(geo.d, -2.0);
    e.partition.hi = Vec(geo.d, 2.0);
    e.partition.cells = e.kind == K::Diagnose ? 32 : 16;
    if (node["partition"]) e.partition = partition(node["partition"], geo.d);
    if (e.kind == K::Diagnose) {
      e.data.kind = DataSpec::Kind::Box;
      e.data.lo = Vec(geo.d, -1.0);
      e.data.hi = Vec(geo.d, 1.0);
    }
    if (node["data"]) e.data = data(node["data"], geo.d);
    if (e.kind == K::Solve && !node["data"]) fail(node, "solve needs 'data'");
    if (node["write_field"]) e.write_field = boolean(node["write_field"], "write_field");
    if (node["write_paths"]) e.write_paths = boolean(node["write_paths"], "write_paths");
    if (node["probes"]) {
      if (!node["probes"].IsSequence()) fail(node["probes"], "'probes' must be a list of points");
      for (const auto& p : node["probes"]) e.probes.push_back(vec(p, "probes", geo.n));
    }
    if (node["paths"]) {
      const long long p = integer(node["paths"], "paths");
      if (p < 1) fail(node["paths"], "'paths' must be positive");
      e.paths = static_cast<size_t>(p);
    }
    if (e.kind == K::Measure) e.routes = {"solver", "walker"};
    if (node["routes"]) {
      if (!node["routes"].IsSequence() || node["routes"].size() == 0) fail(node["routes"], "'routes' must be a nonempty list");
      e.routes.clear();
      for (const auto& r : node["routes"]) {
        const std::string s = scalar(r, "routes");
        if (s != "solver" && s != "walker") fail(r, fmt::format("route must be solver or walker, got '{}'", s));
        e.routes.push_back(s);
      }
    }
    if (node["normalization"])
      e.normalization = choice<Normalization>(node["normalization"], "normalization",
                                              {{"all_paths", Normalization::AllPaths}, {"absorbed", Normalization::Absorbed}});
    if (e.kind == K::Diagnose) {
      if (!node["checks"] || !node["checks"].IsSequence() || node["checks"].size() == 0)
        fail(node, "diagnose needs a nonempty 'checks' list");
      for (const auto& c : node["checks"]) {
        const std::string s = scalar(c, "checks");
        if (!kChecks.count(s)) {
          std::string names;
          for (const auto& k : kChecks) names += names.empty() ? k : ", " + k;
          fail(c, fmt::format("unknown check '{}' (known: {})", s, names));
        }
        e.checks.push_back(s);
      }
    }
    if (node["suite"])
      e.suite = choice<Suite>(node["suite"], "suite", {{"flat", Suite::Flat}, {"graph", Suite::Graph}, {"all", Suite::All}});
    return e;
  }

  ExperimentConfig config(const YAML::Node& root) const {
    ExperimentConfig c;
    expect_map(root, "<root>",
               {"seed", "output_dir", "geometry", "operator", "grid", "tolerances", "walker", "measure", "verify",
                "experiments"});
    if (root["seed"]) {
      const long long s = integer(root["seed"], "seed");
      if (s < 0) fail(root["seed"], "'seed' must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    }
    if (root["output_dir"]) c.output_dir = scalar(root["output_dir"], "output_dir");
    if (root["geometry"]) geometry(root["geometry"], c.geometry);

    if (const YAML::Node op = root["operator"]) {
      expect_map(op, "operator", {"variant", "alpha"});
      if (op["variant"])
        c.op.variant = choice<WeightVariant>(op["variant"], "variant",
                                             {{"smoothed", WeightVariant::Smoothed}, {"geometric", WeightVariant::Geometric}});
      if (op["alpha"]) {
        c.op.alpha = number(op["alpha"], "alpha");
        positive(op["alpha"], "alpha", c.op.alpha);
      }
    }

    if (const YAML::Node g = root["grid"]) {
      expect_map(g, "grid", {"half_width", "spacing", "eps_abs"});
      if (g["half_width"]) c.grid.half_width = number(g["half_width"], "half_width");
      if (g["spacing"]) c.grid.spacing = number(g["spacing"], "spacing");
      if (g["eps_abs"]) c.grid.eps_abs = number(g["eps_abs"], "eps_abs");
      positive(g["half_width"] ? g["half_width"] : g, "half_width", c.grid.half_width);
      positive(g["spacing"] ? g["spacing"] : g, "spacing", c.grid.spacing);
      const double cells = 2.0 * c.grid.half_width / c.grid.spacing;
      if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
        fail(g, fmt::format("grid spacing {} does not divide the box width {}", c.grid.spacing, 2.0 * c.grid.half_width));
      if (g["eps_abs"] && c.grid.eps_abs < 2.0 * c.grid.spacing * (1.0 - 1e-12))
        fail(g["eps_abs"], fmt::format("constraint eps_abs >= 2h violated (eps_abs = {}, h = {})", c.grid.eps_abs,
                                       c.grid.spacing));
    }

    if (const YAML::Node t = root["tolerances"]) {
      expect_map(t, "tolerances", {"solver", "max_iterations", "harnack_c"});
      if (t["solver"]) {
        c.tolerances.solver = number(t["solver"], "solver");
        positive(t["solver"], "solver", c.tolerances.solver);
      }
      if (t["max_iterations"]) {
        c.tolerances.max_iterations = static_cast<int>(integer(t["max_iterations"], "max_iterations"));
        if (c.tolerances.max_iterations < 1) fail(t["max_iterations"], "'max_iterations' must be positive");
      }
      if (t["harnack_c"]) {
        c.tolerances.harnack_c = number(t["harnack_c"], "harnack_c");
        positive(t["harnack_c"], "harnack_c", c.tolerances.harnack_c);
      }
    }

    if (const YAML::Node w = root["walker"]) {
      expect_map(w, "walker", {"paths", "dt0", "eps_abs", "r_esc", "max_steps", "gradient"});
      WalkerParams& p = c.walker.params;
      if (w["paths"]) {
        const long long n = integer(w["paths"], "paths");
        if (n < 1) fail(w["paths"], "'paths' must be positive");
        c.walker.paths = static_cast<size_t>(n);
      }
      if (w["dt0"]) {
        p.dt0 = number(w["dt0"], "dt0");
        positive(w["dt0"], "dt0", p.dt0);
      }
      if (w["eps_abs"]) {
        p.eps_abs = number(w["eps_abs"], "eps_abs");
        positive(w["eps_abs"], "eps_abs", p.eps_abs);
      }
      if (w["r_esc"]) {
        p.r_esc = number(w["r_esc"], "r_esc");
        positive(w["r_esc"], "r_esc", p.r_esc);
      }
      if (w["max_steps"]) {
        p.max_steps = integer(w["max_steps"], "max_steps");
        if (p.max_steps < 1) fail(w["max_steps"], "'max_steps' must be positive");
      }
      if (w["gradient"])
        p.gradient = choice<DriftGradient>(
            w["gradient"], "gradient",
            {{"analytic", DriftGradient::Analytic}, {"centered_difference", DriftGradient::CenteredDifference}});
    }
    c.walker.params.variant = c.op.variant;
    c.walker.params.alpha = c.op.alpha;

    if (const YAML::Node m = root["measure"]) {
      expect_map(m, "measure", {"eta"});
      if (m["eta"]) {
        c.eta = number(m["eta"], "eta");
        positive(m["eta"], "eta", c.eta);
      }
    }

    if (const YAML::Node v = root["verify"]) {
      expect_map(v, "verify", {"graph", "graph_paths", "graph_dt0", "min_paths"});
      if (v["graph"]) c.verify.graph = graph(v["graph"], "verify.graph");
      if (v["graph_paths"]) {
        const long long n = integer(v["graph_paths"], "graph_paths");
        if (n < 1) fail(v["graph_paths"], "'graph_paths' must be positive");
        c.verify.graph_paths = static_cast<size_t>(n);
      }
      if (v["graph_dt0"]) {
        c.verify.graph_dt0 = number(v["graph_dt0"], "graph_dt0");
        positive(v["graph_dt0"], "graph_dt0", c.verify.graph_dt0);
      }
      if (v["min_paths"]) {
        const long long n = integer(v["min_paths"], "min_paths");
        if (n < 1) fail(v["min_paths"], "'min_paths' must be positive");
        c.verify.min_paths = static_cast<size_t>(n);
      }
    }

    if (const YAML::Node ex = root["experiments"]) {
      if (!ex.IsSequence()) fail(ex, "'experiments' must be a list");
      std::set<std::string> names;
      for (size_t i = 0; i < ex.size(); ++i) {
        ExperimentSpec e = experiment(ex[i], c.geometry, i);
        if (!names.insert(e.name).second) fail(ex[i], fmt::format("duplicate experiment name '{}'", e.name));
        c.experiments.push_back(std::move(e));
      }
    }
    return c;
  }

 private:
  std::string path_;
};

}  // namespace

void validate_config(const ExperimentConfig& c) {
  const Parser p(c.path);
  if (c.geometry.d >= c.geometry.n - 1)
    p.fail_at(0, fmt::format("constraint d < n-1 violated (d = {}, n = {}): the boundary must have codimension > 1",
                             c.geometry.d, c.geometry.n));
  if (c.grid.eps_abs != 0.0 && c.grid.eps_abs < 2.0 * c.grid.spacing * (1.0 - 1e-12))
    p.fail_at(0, fmt::format("constraint eps_abs >= 2h violated (eps_abs = {}, h = {})", c.grid.eps_abs, c.grid.spacing));
  if (!(c.tolerances.solver > 0.0) || c.tolerances.max_iterations < 1 || !(c.tolerances.harnack_c > 0.0))
    p.fail_at(0, "all tolerances must be positive");
  if (c.eta < 4.0 * c.geometry.boundary.quadrature_spacing * (1.0 - 1e-12))
    p.fail_at(0, fmt::format("measure.eta = {} is below 4 quadrature_spacing = {}", c.eta,
                             4.0 * c.geometry.boundary.quadrature_spacing));
}

ExperimentConfig parse_config(const std::string& text, const std::string& path) {
  const Parser p(path);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    p.fail_at(e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) p.fail_at(0, "empty config");
  ExperimentConfig c;
  try {
    c = p.config(root);
  } catch (const YAML::Exception& e) {
    p.fail_at(e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  c.path = path;
  c.source = text;
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("{}: cannot open config", path), 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::shared_ptr<const GraphFunction> make_graph_function(const GeometrySpec& geo, const std::string& base_dir) {
  const GraphSpec& g = geo.graph;
  const int codim = geo.n - geo.d;
  if (g.primitive == "sinusoid") return std::make_shared<SinusoidalGraph>(geo.d, codim, g.lambda, g.frequency);
  if (g.primitive == "sawtooth") return std::make_shared<SawtoothGraph>(geo.d, codim, g.lambda, g.period);
  if (g.primitive == "affine") {
    SmallMatrix a;
    a.rows = codim;
    a.cols = geo.d;
    if (!g.slope.empty() && static_cast<int>(g.slope.size()) != codim * geo.d)
      throw ConfigError(fmt::format("affine slope needs {} entries", codim * geo.d), 0);
    for (size_t i = 0; i < g.slope.size(); ++i) a.a[i] = g.slope[i];
    Vec b(codim, 0.0);
    if (!g.offset.empty()) {
      if (static_cast<int>(g.offset.size()) != codim)
        throw ConfigError(fmt::format("affine offset needs {} entries", codim), 0);
      b = Vec(std::span<const double>(g.offset));
    }
    return std::make_shared<AffineGraph>(a, b);
  }
  std::filesystem::path csv(g.csv);
  if (csv.is_relative()) csv = std::filesystem::path(base_dir) / csv;
  return SampledGraph::from_csv(csv.string(), geo.n, geo.d, g.lambda);
}

BoundarySet make_boundary(const GeometrySpec& geo, const std::string& base_dir) {
  if (geo.kind == BoundaryKind::FlatPlane) return BoundarySet::flat(geo.n, geo.d, geo.boundary);
  return BoundarySet::graph(geo.n, make_graph_function(geo, base_dir), geo.boundary);
}

BoundaryData make_data(const DataSpec& data, double eta) {
  switch (data.kind) {
    case DataSpec::Kind::Constant: return BoundaryData::constant(data.value);
    case DataSpec::Kind::Box: return BoundaryData::indicator_box(data.lo, data.hi, eta);
    case DataSpec::Kind::Ball: return BoundaryData::indicator_ball(data.center, data.radius, eta);
  }
  throw InvalidArgument("unknown data kind");
}

}  // namespace codim
