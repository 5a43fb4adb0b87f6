#include "codim/runner.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <map>
#include <set>
#include <nlohmann/json.hpp>
#include <sstream>

#include "codim/parallel.hpp"
#include "codim/poisson.hpp"

#ifndef CODIM_VERSION
#define CODIM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace codim {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot read {}", path));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(f.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::uint64_t stage_seed(std::uint64_t seed, const std::string& stage) {
  std::uint64_t x = seed ^ fnv1a(stage);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string point_label(const Vec& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += fmt::format("{}{}", i ? ":" : "", x[i]);
  return s;
}

/// Diagnostic params may not hold commas or quotes.
std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n') c = ' ';
  return s;
}

struct Stage {
  std::string name;
  std::string kind;
  std::string status = "ok";
  double seconds = 0.0;
  json solver = json::array();
  json summary = json::object();
  std::vector<std::string> outputs;
  std::string error;
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& opt, fs::path out)
      : cfg_(cfg), opt_(opt), out_(std::move(out)) {
    base_dir_ = cfg.path.empty() ? fs::path(".") : fs::path(cfg.path).parent_path();
    if (base_dir_.empty()) base_dir_ = ".";
  }

  RunResult execute() {
    RunResult result;
    result.output_dir = out_.string();
    fs::create_directories(out_);
    const fs::path diag = out_ / "diagnostics.csv";
    fs::remove(diag);
    append_diagnostics_csv({}, diag.string());
    outputs_.insert("diagnostics.csv");

    for (const ExperimentSpec& e : cfg_.experiments) {
      Stage st;
      st.name = e.name;
      st.kind = to_string(e.kind);
      if (opt_.log) *opt_.log << fmt::format("[stage] {} ({})\n", st.name, st.kind) << std::flush;
      const auto t0 = Clock::now();
      std::vector<DiagnosticRow> rows;
      try {
        switch (e.kind) {
          case ExperimentSpec::Kind::Solve: run_solve(e, st, rows); break;
          case ExperimentSpec::Kind::Walk: run_walk(e, st, rows); break;
          case ExperimentSpec::Kind::Measure: run_measure(e, st, rows); break;
          case ExperimentSpec::Kind::Diagnose: run_diagnose(e, st, rows); break;
          case ExperimentSpec::Kind::Verify: run_verify_stage(e, st, rows, result); break;
        }
        append_diagnostics_csv(rows, diag.string());
      } catch (const std::exception& ex) {
        st.status = "failed";
        st.error = ex.what();
        // Rows computed before the failure are still written.
        try {
          append_diagnostics_csv(rows, diag.string());
        } catch (const std::exception&) {
        }
      }
      st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      if (opt_.log)
        *opt_.log << fmt::format("[stage] {} {} in {:.1f} s{}\n", st.name, st.status, st.seconds,
                                 st.error.empty() ? "" : ": " + st.error)
                  << std::flush;
      const bool failed = st.status == "failed";
      stages_.push_back(std::move(st));
      if (failed) {
        result.exit_code = kExitStageFailed;
        break;
      }
    }
    write_manifest(result.exit_code == kExitStageFailed ? "failed" : "ok");
    return result;
  }

 private:
  // -------------------------------------------------------------------------
  // Lazily built shared objects.

  const BoundarySet& boundary() {
    if (!boundary_) boundary_ = make_boundary(cfg_.geometry, base_dir_.string());
    return *boundary_;
  }

  LinearSystem& system() {
    if (!system_) {
      grid_ = std::make_shared<GridDomain>(boundary(), cfg_.grid);
      a_ = build_weight(grid_, cfg_.op.variant, cfg_.op.alpha);
      system_.emplace(grid_, a_);
    }
    return *system_;
  }

  SolveOptions solve_options() const { return {cfg_.tolerances.solver, cfg_.tolerances.max_iterations}; }

  const HarmonicRepresentation& representation(const Vec& x, Stage& st) {
    const std::string key = point_label(x);
    auto it = reps_.find(key);
    if (it == reps_.end()) {
      it = reps_.emplace(key, std::make_unique<HarmonicRepresentation>(system(), x, solve_options())).first;
      st.solver.push_back(solver_json("adjoint", it->second->stats()));
    }
    return *it->second;
  }

  static json solver_json(const std::string& what, const SolveStats& s) {
    json j;
    j["solve"] = what;
    j["iterations"] = s.iterations;
    j["residual"] = s.residual;
    j["seconds"] = s.seconds;
    return j;
  }

  std::string output(Stage& st, const std::string& file) {
    st.outputs.push_back(file);
    outputs_.insert(file);
    return (out_ / file).string();
  }

  WalkerParams walker_params() const { return cfg_.walker.params; }

  OuterData outer_for(const DataSpec& d, const BoundaryData& g) {
    if (d.kind == DataSpec::Kind::Constant) {
      const double v = d.value;
      return [v](const Vec&) { return v; };
    }
    return poisson_extension(boundary(), g);
  }

  ScalarField solve_data(const DataSpec& d, Stage& st, const std::string& label) {
    const BoundaryData g = make_data(d, cfg_.eta);
    LinearSystem& sys = system();
    sys.set_dirichlet(g, outer_for(d, g));
    SolveStats stats;
    ScalarField u = solve(sys, solve_options(), &stats);
    st.solver.push_back(solver_json(label, stats));
    return u;
  }

  // -------------------------------------------------------------------------
  // Stages

  void run_solve(const ExperimentSpec& e, Stage& st, std::vector<DiagnosticRow>& rows) {
    const ScalarField u = solve_data(e.data, st, "dirichlet");
    const std::string p = "stage=" + e.name;
    const json& s = st.solver.back();
    rows.push_back({"solve.iterations", p, s["iterations"].get<double>()});
    rows.push_back({"solve.residual", p, s["residual"].get<double>()});
    rows.push_back({"solve.max_principle", p, max_principle_check(u, system()) ? 1.0 : 0.0});
    for (const Vec& x : e.probes) rows.push_back({"solve.probe", p + ";x=" + point_label(x), interpolate(u, x)});
    if (e.write_field) {
      write_field_csv(u, output(st, e.name + ".field.csv"));
      output(st, e.name + ".field.csv.json");
    }
  }

  const PathEnsemble& ensemble(const ExperimentSpec& e, Stage& st) {
    const size_t n = e.paths ? e.paths : cfg_.walker.paths;
    ensembles_[e.name] = sample_paths(boundary(), e.base_point, n, stage_seed(cfg_.seed, e.name), walker_params());
    const PathEnsemble& ens = ensembles_[e.name];
    st.summary["paths"] = ens.size();
    st.summary["absorbed"] = ens.absorbed;
    st.summary["escaped"] = ens.escaped;
    st.summary["capped"] = ens.capped;
    st.summary["escape_fraction"] = ens.size() ? static_cast<double>(ens.escaped) / ens.size() : 0.0;
    if (ens.cap_warning())
      warnings_.push_back(fmt::format("{}: {} of {} paths hit the step cap", e.name, ens.capped, ens.size()));
    if (ens.deficit() > 0.02)
      warnings_.push_back(fmt::format("{}: escape+cap deficit {:.4f} above 2%", e.name, ens.deficit()));
    return ens;
  }

  void run_walk(const ExperimentSpec& e, Stage& st, std::vector<DiagnosticRow>& rows) {
    const PathEnsemble& ens = ensemble(e, st);
    const std::string p = "stage=" + e.name;
    const double n = static_cast<double>(ens.size());
    rows.push_back({"walk.absorbed_fraction", p, ens.absorbed_fraction()});
    rows.push_back({"walk.escaped_fraction", p, ens.escaped / n});
    rows.push_back({"walk.capped_fraction", p, ens.capped / n});
    if (e.write_paths) write_paths_csv(ens, output(st, e.name + ".paths.csv"));
  }

  Partition partition(const PartitionSpec& p) { return box_partition(boundary(), p.lo, p.hi, p.cells); }

  void measure_rows(const std::string& stage, const std::string& route, const HarmonicMeasure& m,
                    std::vector<DiagnosticRow>& rows) {
    const std::string p = fmt::format("stage={};route={}", stage, route);
    for (size_t j = 0; j < m.mass.size(); ++j) rows.push_back({"measure.mass", fmt::format("{};cell={}", p, j), m.mass[j]});
    rows.push_back({"measure.total", p, m.total()});
    rows.push_back({"measure.deficit", p, m.deficit});
  }

  void run_measure(const ExperimentSpec& e, Stage& st, std::vector<DiagnosticRow>& rows) {
    const Partition part = partition(e.partition);
    std::optional<HarmonicMeasure> solver, walker;
    for (const std::string& route : e.routes) {
      HarmonicMeasure m;
      if (route == "solver") {
        m = measure_from_solver(representation(e.base_point, st), part, cfg_.eta);
      } else {
        const PathEnsemble& ens = ensemble(e, st);
        if (e.write_paths) write_paths_csv(ens, output(st, e.name + ".paths.csv"));
        m = estimate_measure(ens, part, e.normalization);
      }
      write_measure_csv(m, output(st, fmt::format("{}.{}.measure.csv", e.name, route)));
      write_density_csv(density(m), output(st, fmt::format("{}.{}.density.csv", e.name, route)));
      measure_rows(e.name, route, m, rows);
      (route == "solver" ? solver : walker) = std::move(m);
    }
    if (solver && walker) {
      double sigma = 0.0;
      for (double s : walker->error) sigma += 0.5 * s;
      const std::string p = "stage=" + e.name;
      rows.push_back({"measure.total_variation", p, total_variation(*solver, *walker)});
      rows.push_back({"measure.total_variation_sigma", p, sigma});
    }
  }

  void run_diagnose(const ExperimentSpec& e, Stage& st, std::vector<DiagnosticRow>& rows) {
    const BoundarySet& b = boundary();
    const int d = b.boundary_dim(), n = b.ambient_dim();
    const std::string p0 = "stage=" + e.name;
    auto param = [d](double c) {
      Vec v(d, 0.0);
      v[0] = c;
      return v;
    };
    std::optional<ScalarField> u_data, u_flat;
    auto data_field = [&]() -> const ScalarField& {
      if (!u_data) u_data = solve_data(e.data, st, "dirichlet");
      return *u_data;
    };
    auto flat_field = [&]() -> const ScalarField& {
      if (!u_flat) u_flat = pull_back(data_field());
      return *u_flat;
    };
    for (const std::string& c : e.checks) {
      const std::string p = p0 + ";check=" + c;
      if (c == "ellipticity") {
        system();
        const EllipticityEstimate est = ellipticity_check(a_);
        rows.push_back({"diagnose.ellipticity_constant", p, est.constant});
        rows.push_back({"diagnose.ellipticity_min_ratio", p, est.min_ratio});
        rows.push_back({"diagnose.ellipticity_max_ratio", p, est.max_ratio});
      } else if (c == "ahlfors") {
        std::vector<Vec> centers;
        for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) centers.push_back(param(x));
        std::vector<double> scales;
        for (double r = 16.0 * b.quadrature_spacing(); r <= b.window_radius() / 2.0 * (1 + 1e-12); r *= 2.0)
          scales.push_back(r);
        const AhlforsEstimate est = ahlfors_check(b, centers, scales);
        rows.push_back({"diagnose.ahlfors_dimension", p, est.dimension});
        rows.push_back({"diagnose.ahlfors_constant", p, est.constant});
        rows.push_back({"diagnose.ahlfors_empty_balls", p, static_cast<double>(est.empty_balls.size())});
      } else if (c == "harnack_chain") {
        HarnackChainOptions opt;
        opt.c = cfg_.tolerances.harnack_c;
        opt.seed = stage_seed(cfg_.seed, e.name);
        const double r = 0.25;
        for (double lambda : {1.0, 2.0, 10.0}) {
          Vec x1 = b.lift(param(-lambda * r / 2 / std::sqrt(1 + b.lipschitz() * b.lipschitz())));
          Vec x2 = b.lift(param(lambda * r / 2 / std::sqrt(1 + b.lipschitz() * b.lipschitz())));
          x1[n - 1] += r;
          x2[n - 1] += r;
          const double r_used = std::min({r, distance(b, x1), distance(b, x2)});
          const Tube t = harnack_chain(b, x1, x2, r_used, lambda, opt);
          const std::string q = fmt::format("{};lambda={};r={}", p, lambda, r_used);
          rows.push_back({"diagnose.harnack_clearance", q, t.clearance});
          rows.push_back({"diagnose.harnack_threshold", q, t.threshold});
        }
      } else if (c == "doubling") {
        const HarmonicRepresentation& rep = representation(e.base_point, st);
        for (double y : {-0.5, -0.25, 0.0, 0.25, 0.5})
          for (double r : {0.25, 0.5, 1.0}) {
            Vec lo(d, -2 * r), hi(d, 2 * r);
            lo[0] += y;
            hi[0] += y;
            const HarmonicMeasure m = measure_from_solver(rep, box_partition(b, lo, hi, 4), cfg_.eta);
            rows.push_back({"diagnose.doubling_ratio", fmt::format("{};y={};r={}", p, y, r),
                            doubling_ratio(m, b, param(y), r)});
          }
      } else if (c == "a_infinity") {
        const HarmonicMeasure m = measure_from_solver(representation(e.base_point, st), partition(e.partition), cfg_.eta);
        const DensityProfile k = density(m);
        write_density_csv(k, output(st, e.name + ".density.csv"));
        std::vector<ParamRegion> boxes;
        for (double side : {0.5, 1.0, 2.0})
          for (double x : {-0.5, 0.0, 0.5}) boxes.push_back(cube(param(x), side));
        const AInfinityResult ai = a_infinity_diagnostic(k, boxes);
        for (size_t i = 0; i < ai.boxes.size(); ++i)
          rows.push_back({"diagnose.a_infinity_ratio", fmt::format("{};box={}", p, i), ai.boxes[i].ratio});
        rows.push_back({"diagnose.a_infinity_max", p, ai.max_ratio});
        if (ai.flagged) warnings_.push_back(fmt::format("{}: A-infinity ratio {:.4g} flagged", e.name, ai.max_ratio));
      } else if (c == "square_function") {
        for (double l : {0.25, 0.5, 1.0}) {
          const SquareFunctionResult s = square_function(flat_field(), param(0.0), l);
          const std::string q = fmt::format("{};side={}", p, l);
          rows.push_back({"diagnose.square_function_ratio_n_u", q, s.ratio(NontangentialVariant::Value)});
          rows.push_back({"diagnose.square_function_ratio_n_grad", q, s.ratio(NontangentialVariant::Gradient)});
        }
      } else if (c == "carleson") {
        const ScalarField f = t_gradient_field(flat_field());
        std::vector<ParamRegion> boxes;
        for (double l : {0.25, 0.5, 1.0})
          for (double x : {-0.5, 0.0, 0.5}) boxes.push_back(cube(param(x), l));
        const CarlesonResult cr = carleson_norm(*f.grid, [&f](size_t i) { return f[i]; }, boxes);
        rows.push_back({"diagnose.carleson_norm", p, cr.value});
        rows.push_back({"diagnose.carleson_coarse", p, cr.coarse});
        rows.push_back({"diagnose.carleson_growth", p, cr.growth});
        if (cr.flagged) warnings_.push_back(fmt::format("{}: Carleson growth {:.4g} flagged", e.name, cr.growth));
      } else if (c == "poincare") {
        const ScalarField w = build_weight(system().grid_ptr(), WeightVariant::Geometric);
        ScalarField delta(system().grid_ptr());
        for (size_t i = 0; i < delta.size(); ++i) delta[i] = delta.grid->delta(i);
        const Vec x = b.lift(param(0.0));
        for (double r : {0.25, 0.5, 1.0}) {
          const std::string q = fmt::format("{};r={}", p, r);
          rows.push_back({"diagnose.poincare_boundary_distance", q, poincare_boundary_ratio(delta, w, param(0.0), r).value});
          rows.push_back({"diagnose.poincare_weighted_data", q, poincare_weighted_ratio(data_field(), w, x, r, 2.0).value});
        }
      }
    }
  }

  void run_verify_stage(const ExperimentSpec& e, Stage& st, std::vector<DiagnosticRow>& rows, RunResult& result) {
    ExperimentConfig cfg = cfg_;
    auto print = [this](const Criterion& c) {
      if (opt_.table) *opt_.table << format_criterion(c) << '\n' << std::flush;
    };
    VerifyReport report = run_verify(cfg, e.suite, print);
    write_verify_csv(report, output(st, e.name + ".verify.csv"));
    json crit = json::array();
    for (const Criterion& c : report.criteria) {
      json j;
      j["criterion"] = c.id;
      j["title"] = c.title;
      j["status"] = to_string(c.status());
      j["seconds"] = c.seconds;
      json checks = json::array();
      for (const Check& k : c.checks) {
        json kj;
        kj["geometry"] = k.geometry;
        kj["quantity"] = k.quantity;
        kj["measured"] = std::isfinite(k.measured) ? json(k.measured) : json(nullptr);
        kj["threshold"] = k.threshold;
        kj["status"] = to_string(k.status);
        if (!k.note.empty()) kj["note"] = k.note;
        checks.push_back(kj);
        if (!k.timing && std::isfinite(k.measured))
          rows.push_back({fmt::format("verify.c{}", c.id),
                          clean(fmt::format("stage={};geometry={};quantity={}", e.name, k.geometry, k.quantity)),
                          k.measured});
        if (k.status == CheckStatus::Fail)
          warnings_.push_back(fmt::format("{}: C{} {} {} failed", e.name, c.id, k.geometry, k.quantity));
      }
      j["checks"] = checks;
      crit.push_back(j);
    }
    st.summary["suite"] = to_string(e.suite);
    st.summary["passed"] = report.passed();
    st.summary["criteria"] = crit;
    if (!report.passed() && result.exit_code == kExitOk) result.exit_code = kExitVerifyFailed;
    result.verify = std::move(report);
  }

  void write_manifest(const std::string& status) {
    json m;
    m["tool"] = "codim-harmonic";
    m["code_version"] = CODIM_VERSION;
    m["status"] = status;
    json c;
    c["path"] = cfg_.path;
    c["sha256"] = sha256_hex(cfg_.source);
    m["config"] = c;
    m["seed"] = cfg_.seed;
    m["threads"] = max_threads();
    m["output_dir"] = out_.string();
    json g;
    g["kind"] = cfg_.geometry.kind == BoundaryKind::FlatPlane ? "flat" : "graph";
    g["n"] = cfg_.geometry.n;
    g["d"] = cfg_.geometry.d;
    g["grid_half_width"] = cfg_.grid.half_width;
    g["grid_spacing"] = cfg_.grid.spacing;
    g["eps_abs"] = cfg_.grid.eps_abs > 0.0 ? cfg_.grid.eps_abs : 2.0 * cfg_.grid.spacing;
    m["resolution"] = g;
    json stages = json::array();
    for (const Stage& s : stages_) {
      json j;
      j["name"] = s.name;
      j["kind"] = s.kind;
      j["status"] = s.status;
      j["seconds"] = s.seconds;
      j["solver"] = s.solver;
      j["summary"] = s.summary;
      j["outputs"] = s.outputs;
      if (!s.error.empty()) j["error"] = s.error;
      stages.push_back(j);
    }
    m["stages"] = stages;
    m["warnings"] = warnings_;
    json files = json::array();
    for (const std::string& f : outputs_) {
      const fs::path p = out_ / f;
      if (!fs::exists(p)) continue;
      json j;
      j["path"] = f;
      j["bytes"] = fs::file_size(p);
      j["sha256"] = sha256_file(p.string());
      files.push_back(j);
    }
    m["files"] = files;
    std::ofstream f(out_ / "manifest.json", std::ios::binary);
    if (!f) throw Error(fmt::format("cannot write {}", (out_ / "manifest.json").string()));
    f << m.dump(2) << '\n';
  }

  const ExperimentConfig& cfg_;
  const RunOptions& opt_;
  fs::path out_;
  fs::path base_dir_;
  std::optional<BoundarySet> boundary_;
  std::shared_ptr<const GridDomain> grid_;
  ScalarField a_;
  std::optional<LinearSystem> system_;
  std::map<std::string, std::unique_ptr<HarmonicRepresentation>> reps_;
  std::map<std::string, PathEnsemble> ensembles_;
  std::vector<Stage> stages_;
  std::vector<std::string> warnings_;
  std::set<std::string> outputs_;
};

}  // namespace

RunResult run(ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.seed = *options.seed;
  if (options.output_dir) config.output_dir = *options.output_dir;
  if (options.verify_suite) {
    ExperimentSpec v;
    v.kind = ExperimentSpec::Kind::Verify;
    v.name = "verify";
    v.suite = *options.verify_suite;
    config.experiments = {v};
  }
  set_max_threads(options.threads);
  Runner runner(config, options, fs::path(config.output_dir));
  return runner.execute();
}

}  // namespace codim
