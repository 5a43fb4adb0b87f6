#include "codim/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>

#include "codim/poisson.hpp"

namespace codim {

namespace th = thresholds;

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Underpowered: return "UNDERPOWERED";
    case CheckStatus::Skipped: return "SKIPPED";
  }
  return "?";
}

CheckStatus Criterion::status() const {
  if (checks.empty()) return CheckStatus::Skipped;
  bool underpowered = false, any = false;
  for (const Check& c : checks) {
    if (c.status == CheckStatus::Fail) return CheckStatus::Fail;
    underpowered = underpowered || c.status == CheckStatus::Underpowered;
    any = any || c.status != CheckStatus::Skipped;
  }
  if (!any) return CheckStatus::Skipped;
  return underpowered ? CheckStatus::Underpowered : CheckStatus::Pass;
}

bool VerifyReport::passed() const {
  for (const Criterion& c : criteria)
    if (c.status() == CheckStatus::Fail) return false;
  return true;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Check check(const std::string& geometry, const std::string& quantity, double measured, const std::string& threshold,
            bool pass, std::string note = {}) {
  return {geometry, quantity, measured, threshold, pass ? CheckStatus::Pass : CheckStatus::Fail, std::move(note), false};
}

/// Parameter point (c, 0, ..., 0).
Vec param_at(int d, double c) {
  Vec p(d, 0.0);
  p[0] = c;
  return p;
}

/// Box [a, b] x [-1, 1]^{d-1}.
ParamRegion slab(int d, double a, double b) {
  ParamRegion r;
  r.lo = Vec(d, -1.0);
  r.hi = Vec(d, 1.0);
  r.lo[0] = a;
  r.hi[0] = b;
  return r;
}

struct Level {
  std::shared_ptr<const GridDomain> grid;
  ScalarField a;
  ScalarField w;
  std::optional<LinearSystem> system;
};

/// Shared state of one geometry: grids at h and 2h, the adjoint
/// representation at the base point, the walker ensemble and the indicator
/// solutions, each built on first use.
class Geometry {
 public:
  Geometry(std::string label, BoundarySet boundary, const ExperimentConfig& cfg, WalkerParams walker, size_t paths,
           std::uint64_t seed)
      : label(std::move(label)), boundary(std::move(boundary)), cfg_(cfg), walker_(walker), paths_(paths), seed_(seed) {
    const int n = this->boundary.ambient_dim(), d = this->boundary.boundary_dim();
    base_ = this->boundary.lift(Vec(d, 0.0));
    base_[n - 1] += 1.0;
  }

  const std::string label;
  const BoundarySet boundary;

  int d() const { return boundary.boundary_dim(); }
  int n() const { return boundary.ambient_dim(); }
  bool flat() const { return boundary.is_flat(); }
  const Vec& base() const { return base_; }
  size_t paths() const { return paths_; }
  double eta() const { return cfg_.eta; }
  SolveOptions solve_options(double tol = 0.0) const {
    return {tol > 0.0 ? tol : cfg_.tolerances.solver, cfg_.tolerances.max_iterations};
  }

  Level& level(bool fine) {
    Level& L = fine ? fine_ : coarse_;
    if (!L.grid) {
      GridSpec spec = cfg_.grid;
      if (!fine) {
        spec.spacing *= 2.0;
        spec.eps_abs *= 2.0;
      }
      L.grid = std::make_shared<GridDomain>(boundary, spec);
      L.a = build_weight(L.grid, cfg_.op.variant, cfg_.op.alpha);
      L.w = build_weight(L.grid, WeightVariant::Geometric);
      L.system.emplace(L.grid, L.a);
    }
    return L;
  }

  ScalarField solve_on(bool fine, const BoundaryData& g, const OuterData& out, double tol = 0.0) {
    Level& L = level(fine);
    L.system->set_dirichlet(g, out);
    return solve(*L.system, solve_options(tol));
  }

  /// Solution with mollified indicator data of `region` and Poisson outer data.
  ScalarField indicator_solution(bool fine, const ParamRegion& region) {
    const BoundaryData chi = BoundaryData::indicator_box(region.lo, region.hi, eta());
    return solve_on(fine, chi, poisson_extension(boundary, chi));
  }

  /// Solution with data 1 - chi_region, vanishing on the region.
  ScalarField complement_solution(bool fine, const ParamRegion& region) {
    const BoundaryData chi = BoundaryData::indicator_box(region.lo, region.hi, eta());
    const BoundaryData g = BoundaryData::combine(1.0, BoundaryData::constant(1.0), -1.0, chi);
    const OuterData p = poisson_extension(boundary, chi);
    return solve_on(fine, g, [p](const Vec& x) { return 1.0 - p(x); });
  }

  const HarmonicRepresentation& representation() {
    if (!rep_) rep_.emplace(*level(true).system, base_, solve_options());
    return *rep_;
  }

  const Partition& cells16() {
    if (!cells16_) cells16_ = box_partition(boundary, Vec(d(), -2.0), Vec(d(), 2.0), 16);
    return *cells16_;
  }

  const HarmonicMeasure& solver16() {
    if (!solver16_) solver16_ = measure_from_solver(representation(), cells16(), eta());
    return *solver16_;
  }

  const PathEnsemble& ensemble() {
    if (!ensemble_) {
      const auto t0 = Clock::now();
      ensemble_ = sample_paths(boundary, base_, paths_, seed_, walker_);
      walker_seconds_ = seconds_since(t0);
    }
    return *ensemble_;
  }
  double walker_seconds() const { return walker_seconds_; }

  const HarmonicMeasure& walker16() {
    if (!walker16_) walker16_ = estimate_measure(ensemble(), cells16(), Normalization::AllPaths);
    return *walker16_;
  }

  /// The five indicator regions of the square-function and Carleson checks.
  std::vector<ParamRegion> indicator_regions() const {
    return {slab(d(), -1.0, 1.0), slab(d(), 0.0, 0.5), slab(d(), -0.75, 0.25), slab(d(), 0.25, 1.5),
            slab(d(), -1.5, -0.25)};
  }

  /// Indicator solutions at h in flat coordinates.
  const std::vector<ScalarField>& pulled_indicator_solutions() {
    if (pulled_.empty())
      for (const ParamRegion& r : indicator_regions()) pulled_.push_back(pull_back(indicator_solution(true, r)));
    return pulled_;
  }

  void release_fields() { pulled_.clear(); }

 private:
  const ExperimentConfig& cfg_;
  WalkerParams walker_;
  size_t paths_;
  std::uint64_t seed_;
  Vec base_;
  Level fine_, coarse_;
  std::optional<HarmonicRepresentation> rep_;
  std::optional<Partition> cells16_;
  std::optional<HarmonicMeasure> solver16_;
  std::optional<PathEnsemble> ensemble_;
  double walker_seconds_ = 0.0;
  std::optional<HarmonicMeasure> walker16_;
  std::vector<ScalarField> pulled_;
};

using Body = std::function<void(Geometry&, std::vector<Check>&)>;

/// Runs `body` per geometry; an exception becomes a failed check.
void for_geometries(std::vector<Geometry*>& geos, std::vector<Check>& out, const Body& body) {
  for (Geometry* g : geos) {
    try {
      body(*g, out);
    } catch (const std::exception& e) {
      out.push_back(check(g->label, "error", std::numeric_limits<double>::quiet_NaN(), "-", false, e.what()));
    }
  }
}

std::vector<Geometry*> only_flat(std::vector<Geometry*>& geos) {
  std::vector<Geometry*> out;
  for (Geometry* g : geos)
    if (g->flat()) out.push_back(g);
  return out;
}

std::string fmt_num(double v) { return fmt::format("{:.6g}", v); }

// ---------------------------------------------------------------------------
// Criteria

void c1_solver_oracle(Geometry& g, std::vector<Check>& out) {
  const auto t0 = Clock::now();
  const HarmonicMeasure& omega = g.solver16();
  const double secs = seconds_since(t0);
  double mass = 0.0;
  for (size_t j = 0; j < omega.partition.size(); ++j)
    if (std::abs(omega.partition.cells[j].center[0]) < 1.0) mass += omega.mass[j];
  out.push_back(check(g.label, "omega[-1..1]", mass, fmt::format("[{}, {}]", th::kOmegaLo, th::kOmegaHi),
                      mass >= th::kOmegaLo && mass <= th::kOmegaHi,
                      fmt::format("oracle 1/2; {} adjoint iterations", g.representation().stats().iterations)));
  Check t = check(g.label, "solver seconds", secs, fmt::format("<= {}", th::kSolverSeconds), secs <= th::kSolverSeconds);
  t.timing = true;
  out.push_back(t);
}

void c2_walker_oracle(Geometry& g, std::vector<Check>& out, size_t min_paths) {
  const HarmonicMeasure& omega = g.walker16();
  const PathEnsemble& e = g.ensemble();
  double mass = 0.0;
  for (size_t j = 0; j < omega.partition.size(); ++j)
    if (std::abs(omega.partition.cells[j].center[0]) < 1.0) mass += omega.mass[j];
  const double n = static_cast<double>(e.size());
  const double sigma = 0.5 / std::sqrt(n);
  const double band = th::kWalkerSigmas * sigma;
  Check m = check(g.label, "walker omega[-1..1]", mass, fmt::format("1/2 +- {:.4g} (3 sigma, N = {})", band, e.size()),
                  std::abs(mass - 0.5) <= band);
  Check def = check(g.label, "escape+cap deficit", e.deficit(), fmt::format("<= {}", th::kDeficit),
                    e.deficit() <= th::kDeficit, fmt::format("{} escaped, {} capped", e.escaped, e.capped));
  if (e.size() < min_paths) {
    m.status = def.status = CheckStatus::Underpowered;
    m.note = def.note = fmt::format("N = {} < {}", e.size(), min_paths);
  }
  out.push_back(m);
  out.push_back(def);
  Check t = check(g.label, "walker seconds", g.walker_seconds(), fmt::format("<= {}", th::kWalkerSeconds),
                  g.walker_seconds() <= th::kWalkerSeconds);
  t.timing = true;
  out.push_back(t);
}

double distance_to_axis(const Vec& x, int d) {
  double s = 0.0;
  for (int k = d; k < x.size(); ++k) s += x[k] * x[k];
  return std::sqrt(s);
}

double max_interior_error(const ScalarField& u, const std::function<double(const Vec&)>& exact) {
  const GridDomain& grid = *u.grid;
  double err = 0.0;
  for (size_t i = 0; i < grid.size(); ++i)
    if (grid.node_class(i) == NodeClass::Interior) err = std::max(err, std::abs(u[i] - exact(grid.position(i))));
  return err;
}

void c3_exact_solutions(Geometry& g, std::vector<Check>& out) {
  const int d = g.d();
  const BoundaryData one = BoundaryData::constant(1.0);
  const ScalarField u1 = g.solve_on(true, one, [](const Vec&) { return 1.0; }, 1e-10);
  double e1 = 0.0;
  for (double v : u1.values) e1 = std::max(e1, std::abs(v - 1.0));
  out.push_back(check(g.label, "max |u - 1|", e1, fmt::format("<= {}", th::kConstantError), e1 <= th::kConstantError));

  auto t = [d](const Vec& x) { return distance_to_axis(x, d); };
  const BoundaryData zero = BoundaryData::constant(0.0);
  const double err_h = max_interior_error(g.solve_on(true, zero, t, 1e-10), t);
  const double err_2h = max_interior_error(g.solve_on(false, zero, t, 1e-10), t);
  out.push_back(check(g.label, "max |u - |t|| at h", err_h, fmt::format("<= {}", th::kDistanceError),
                      err_h <= th::kDistanceError));
  out.push_back(check(g.label, "error ratio 2h / h", err_2h / err_h, fmt::format(">= {}", th::kErrorRatio),
                      err_2h / err_h >= th::kErrorRatio, fmt::format("error at 2h {:.4g}", err_2h)));
}

void c4_ellipticity(Geometry& g, std::vector<Check>& out) {
  const double ch = ellipticity_check(g.level(true).a).constant;
  const double c2h = ellipticity_check(g.level(false).a).constant;
  const double drift = std::abs(ch / c2h - 1.0);
  out.push_back(check(g.label, "|C1(h) / C1(2h) - 1|", drift, fmt::format("<= {}", th::kEllipticityDrift),
                      std::isfinite(ch) && std::isfinite(c2h) && drift <= th::kEllipticityDrift,
                      fmt::format("C1 = {:.6g} at h, {:.6g} at 2h", ch, c2h)));
}

void c5_ahlfors(Geometry& g, std::vector<Check>& out) {
  std::vector<Vec> centers;
  for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) centers.push_back(param_at(g.d(), c));
  std::vector<double> scales;
  for (double r = 16.0 * g.boundary.quadrature_spacing(); r <= g.boundary.window_radius() / 2.0 * (1 + 1e-12); r *= 2.0)
    scales.push_back(r);
  const AhlforsEstimate est = ahlfors_check(g.boundary, centers, scales);
  out.push_back(check(g.label, "d_est", est.dimension, fmt::format("{} +- {}", g.d(), th::kAhlforsDimension),
                      est.ok() && std::abs(est.dimension - g.d()) <= th::kAhlforsDimension,
                      fmt::format("{} balls, r in [{:.4g}, {:.4g}]", est.samples.size(), scales.front(), scales.back())));
  out.push_back(check(g.label, "C0_est", est.constant, fmt::format("<= {}", th::kAhlforsConstant),
                      est.ok() && est.constant <= th::kAhlforsConstant));
}

void c6_poincare(Geometry& g, std::vector<Check>& out) {
  const Vec origin = param_at(g.d(), 0.0);
  const Vec x = g.boundary.lift(origin);
  const std::vector<double> radii = {0.25, 0.5, 1.0};
  std::vector<ScalarField> coarse, fine;
  auto dist_field = [](bool fine_level, Geometry& geo) {
    const auto grid = geo.level(fine_level).grid;
    ScalarField f(grid);
    for (size_t i = 0; i < grid->size(); ++i) f[i] = grid->delta(i);
    return f;
  };
  coarse.push_back(dist_field(false, g));
  fine.push_back(dist_field(true, g));
  // Zero sets clear the largest ball by more than a coarse tube width.
  for (double a : {1.25, 1.5, 1.75, 2.0, 2.25}) {
    coarse.push_back(g.complement_solution(false, slab(g.d(), -a, a)));
    fine.push_back(g.complement_solution(true, slab(g.d(), -a, a)));
  }
  double worst = 0.0;
  bool ok = true;
  int pairs = 0;
  for (size_t f = 0; f < fine.size(); ++f)
    for (double r : radii)
      for (int kind = 0; kind < 2; ++kind) {
        const ScalarField& wc = g.level(false).w;
        const ScalarField& wf = g.level(true).w;
        const RatioResult rc = kind == 0 ? poincare_boundary_ratio(coarse[f], wc, origin, r)
                                         : poincare_weighted_ratio(coarse[f], wc, x, r, 2.0);
        const RatioResult rf = kind == 0 ? poincare_boundary_ratio(fine[f], wf, origin, r)
                                         : poincare_weighted_ratio(fine[f], wf, x, r, 2.0);
        const bool finite = std::isfinite(rc.value) && std::isfinite(rf.value) && !rc.violation && !rf.violation;
        const double q = rf.value > 0.0 ? rc.value / rf.value : (rc.value > 0.0 ? INFINITY : 1.0);
        ok = ok && finite && rc.value <= th::kPoincareFactor * rf.value;
        worst = std::max(worst, q);
        ++pairs;
      }
  out.push_back(check(g.label, "max ratio(2h) / ratio(h)", worst, fmt::format("<= {}", th::kPoincareFactor), ok,
                      fmt::format("{} pairs: 6 functions x 3 radii x 2 inequalities", pairs)));
}

void c7_harnack(Geometry& g, std::vector<Check>& out, double c) {
  const int d = g.d(), n = g.n();
  const double lip = g.boundary.lipschitz();
  double worst = INFINITY;
  bool ok = true;
  int count = 0;
  HarnackChainOptions opt;
  opt.c = c;
  for (double r : {0.25, 0.5})
    for (double lambda : {1.0, 2.0, 10.0})
      for (int side : {1, -1}) {
        if (side < 0 && lambda < 2.5) continue;  // opposite sides are 2r apart
        double s = lambda * r / std::sqrt(1.0 + lip * lip);
        Vec x1, x2;
        for (int it = 0; it < 200; ++it) {
          x1 = g.boundary.lift(param_at(d, -s / 2));
          x2 = g.boundary.lift(param_at(d, s / 2));
          x1[n - 1] += r;
          x2[n - 1] += side * r;
          if (norm(x1 - x2) <= lambda * r) break;
          s *= 0.98;
        }
        const double r_used = std::min({r, distance(g.boundary, x1), distance(g.boundary, x2)});
        const Tube tube = harnack_chain(g.boundary, x1, x2, r_used, lambda, opt);
        ok = ok && tube.success;
        worst = std::min(worst, tube.clearance / tube.threshold);
        ++count;
      }
  out.push_back(check(g.label, "min clearance / (c Lambda^-1 r)", worst, ">= 1", ok,
                      fmt::format("{} chains, Lambda in {{1, 2, 10}}, r in {{1/4, 1/2}}", count)));
}

double doubling_at(Geometry& g, double y, double r) {
  Vec lo(g.d(), -2 * r), hi(g.d(), 2 * r);
  lo[0] += y;
  hi[0] += y;
  const Partition p = box_partition(g.boundary, lo, hi, 4);
  const HarmonicMeasure omega = measure_from_solver(g.representation(), p, g.eta());
  return doubling_ratio(omega, g.boundary, param_at(g.d(), y), r);
}

void c8_doubling(Geometry& g, std::vector<Check>& out) {
  const std::vector<double> ys = {-0.5, -0.25, 0.0, 0.25, 0.5};
  const std::vector<double> rs = {0.25, 0.5, 1.0};
  std::vector<std::vector<double>> cd(ys.size(), std::vector<double>(rs.size()));
  double worst = 0.0;
  bool finite = true;
  for (size_t i = 0; i < ys.size(); ++i)
    for (size_t j = 0; j < rs.size(); ++j) {
      cd[i][j] = doubling_at(g, ys[i], rs[j]);
      finite = finite && std::isfinite(cd[i][j]) && cd[i][j] > 0.0;
      worst = std::max(worst, cd[i][j]);
    }
  if (g.flat()) {
    const double oracle = 4.0 / std::numbers::pi * std::atan(2.0);
    out.push_back(check(g.label, "max doubling ratio", worst, fmt::format("<= {}", th::kDoublingFlat),
                        finite && worst <= th::kDoublingFlat,
                        fmt::format("y=0, r=1: {:.4f} (kernel value {:.4f})", cd[2][2], oracle)));
    return;
  }
  double drift = 0.0, spread = 0.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    double lo = INFINITY, hi = 0.0;
    for (size_t j = 0; j < rs.size(); ++j) {
      lo = std::min(lo, cd[i][j]);
      hi = std::max(hi, cd[i][j]);
      if (j + 1 < rs.size()) drift = std::max(drift, std::abs(cd[i][j] / cd[i][j + 1] - 1.0));
    }
    spread = std::max(spread, hi / lo);
  }
  out.push_back(check(g.label, "max doubling ratio", worst, "finite", finite));
  out.push_back(check(g.label, "max |C_D(r) / C_D(2r) - 1|", drift, fmt::format("<= {}", th::kDoublingDrift),
                      finite && drift <= th::kDoublingDrift,
                      fmt::format("max over r of C_D / min over r {:.4f}", spread)));
}

void c9_comparison(Geometry& g, std::vector<Check>& out) {
  const BoundarySet& b = g.boundary;
  const BoundaryData zero = BoundaryData::constant(0.0);
  auto dist = [&b](const Vec& x) { return distance(b, x); };
  // Clears the doubled balls by more than a coarse tube width.
  const ParamRegion zero_set = slab(g.d(), -1.75, 1.75);
  const ScalarField u_c = g.solve_on(false, zero, dist);
  const ScalarField v_c = g.complement_solution(false, zero_set);
  const ScalarField u_f = g.solve_on(true, zero, dist);
  const ScalarField v_f = g.complement_solution(true, zero_set);
  double drift = 0.0, c_max = 0.0;
  int count = 0;
  for (double x : {-0.4, -0.2, 0.0, 0.2, 0.4})
    for (double r : {0.25, 0.5}) {
      const double cc = comparison_ratio(u_c, v_c, param_at(g.d(), x), r);
      const double cf = comparison_ratio(u_f, v_f, param_at(g.d(), x), r);
      drift = std::max(drift, std::abs(cc / cf - 1.0));
      c_max = std::max(c_max, cf);
      ++count;
    }
  out.push_back(check(g.label, "max |C(2h) / C(h) - 1|", drift, fmt::format("<= {}", th::kComparisonDrift),
                      drift <= th::kComparisonDrift, fmt::format("{} balls; max C at h {:.4g}", count, c_max)));
}

std::vector<double> box_positions() {
  std::vector<double> c;
  for (int k = 0; k < 10; ++k) c.push_back(-0.9 + 0.2 * k);
  return c;
}

void c10_square_function(Geometry& g, std::vector<Check>& out) {
  const auto& fields = g.pulled_indicator_solutions();
  double worst_u = 0.0, worst_grad = 0.0;
  std::string per_scale;
  int count = 0;
  for (double l : {0.25, 0.5, 1.0}) {
    double scale_max = 0.0;
    for (const ScalarField& u : fields)
      for (double c : box_positions()) {
        const SquareFunctionResult s = square_function(u, param_at(g.d(), c), l);
        const double ru = s.ratio(NontangentialVariant::Value);
        scale_max = std::max(scale_max, ru);
        worst_grad = std::max(worst_grad, s.ratio(NontangentialVariant::Gradient));
        ++count;
      }
    worst_u = std::max(worst_u, scale_max);
    per_scale += fmt::format("{}l={}: {:.4g}", per_scale.empty() ? "" : ", ", l, scale_max);
  }
  out.push_back(check(g.label, "max S/(N_U + trace) ratio", worst_u, fmt::format("<= {}", th::kSquareFunction),
                      std::isfinite(worst_u) && worst_u <= th::kSquareFunction,
                      fmt::format("{} cubes; per scale {}; N_GRAD variant max {:.4g}", count, per_scale, worst_grad)));
}

// mu(Q x {cut < |t| < l}) for the exact flat solution with indicator data of
// [a, b], n = 3, d = 1: u = (atan((b - x)/s) - atan((a - x)/s)) / pi in the
// half-plane (x, s = |t|), and d mu = |grad u|^2 2 pi s ds dx.
double flat_carleson_mass(double a, double b, double c, double l, double cut) {
  const std::array<double, 8> z = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  const std::array<double, 8> wt = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  auto integrand = [&](double x, double s) {
    auto grad = [&](double e) {
      const double r2 = (e - x) * (e - x) + s * s;
      return std::array<double, 2>{-s / r2, (e - x) / r2};
    };
    const auto gb = grad(b), ga = grad(a);
    const double gx = (gb[0] - ga[0]) / std::numbers::pi, gs = (gb[1] - ga[1]) / std::numbers::pi;
    return (gx * gx + gs * gs) * 2.0 * std::numbers::pi * s;
  };
  // Panels graded towards s = cut and uniform in x, with breaks at the edges.
  std::vector<double> xs = {c - l / 2, c + l / 2};
  for (double e : {a, b})
    if (e > xs.front() && e < xs.back()) xs.push_back(e);
  std::sort(xs.begin(), xs.end());
  std::vector<double> xb;
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    for (int k = 0; k < 64; ++k) xb.push_back(xs[i] + (xs[i + 1] - xs[i]) * k / 64.0);
  xb.push_back(xs.back());
  std::vector<double> sb = {cut};
  while (sb.back() * 1.25 < l) sb.push_back(sb.back() * 1.25);
  sb.push_back(l);
  double total = 0.0;
  for (size_t i = 0; i + 1 < xb.size(); ++i)
    for (size_t j = 0; j + 1 < sb.size(); ++j) {
      const double hx = (xb[i + 1] - xb[i]) / 2, mx = (xb[i + 1] + xb[i]) / 2;
      const double hs = (sb[j + 1] - sb[j]) / 2, ms = (sb[j + 1] + sb[j]) / 2;
      for (int p = 0; p < 8; ++p)
        for (int q = 0; q < 8; ++q) total += wt[p] * wt[q] * hx * hs * integrand(mx + hx * z[p], ms + hs * z[q]);
    }
  return total;
}

void c11_carleson(Geometry& g, std::vector<Check>& out) {
  const auto& fields = g.pulled_indicator_solutions();
  const std::vector<double> sides = {0.25, 0.5, 1.0};
  std::vector<ParamRegion> boxes;
  for (double l : sides)
    for (double c : box_positions()) boxes.push_back(cube(param_at(g.d(), c), l));
  double worst_growth = 0.0, worst_value = 0.0;
  bool finite = true;
  for (const ScalarField& u : fields) {
    const ScalarField f = t_gradient_field(u);
    const CarlesonResult cr = carleson_norm(*f.grid, [&f](size_t i) { return f[i]; }, boxes);
    finite = finite && std::isfinite(cr.value) && cr.value > 0.0;
    worst_growth = std::max(worst_growth, cr.growth);
    worst_value = std::max(worst_value, cr.value);
  }
  std::string note = fmt::format("5 solutions x {} boxes; max norm {:.4g}", boxes.size(), worst_value);
  if (g.flat() && g.d() == 1 && g.boundary.ambient_dim() == 3) {
    // Growth of the exact solutions at the same cutoff: what the grid should
    // reproduce, independent of the discretization.
    const double eps = fields.front().grid->eps_abs();
    double exact = 0.0;
    for (const ParamRegion& r : g.indicator_regions()) {
      double fine = 0.0, coarse = 0.0;
      for (double l : sides)
        for (double c : box_positions()) {
          fine = std::max(fine, flat_carleson_mass(r.lo[0], r.hi[0], c, l, eps) / l);
          coarse = std::max(coarse, flat_carleson_mass(r.lo[0], r.hi[0], c, l, 2.0 * eps) / l);
        }
      exact = std::max(exact, fine / coarse);
    }
    note += fmt::format("; exact solutions at the same cutoff {:.4g}", exact);
  }
  out.push_back(check(g.label, "max Carleson two-tube growth", worst_growth, fmt::format("<= {}", th::kCarlesonGrowth),
                      finite && worst_growth <= th::kCarlesonGrowth, note));

  const Partition p = box_partition(g.boundary, Vec(g.d(), -2.0), Vec(g.d(), 2.0), 32);
  const DensityProfile k = density(measure_from_solver(g.representation(), p, g.eta()));
  std::vector<ParamRegion> family;
  for (double side : {0.5, 1.0, 2.0})
    for (double c : {-0.5, 0.0, 0.5}) family.push_back(cube(param_at(g.d(), c), side));
  const AInfinityResult ai = a_infinity_diagnostic(k, family);
  if (!g.flat()) {
    out.push_back(check(g.label, "max A-infinity box ratio", ai.max_ratio, fmt::format("<= {}", th::kAInfinity),
                        !ai.flagged && ai.max_ratio <= th::kAInfinity, "9 boxes, sides 1/2, 1, 2"));
    return;
  }
  if (g.d() != 1) {
    out.push_back({g.label, "A-infinity vs Poisson", 0.0, "-", CheckStatus::Skipped, "closed form needs d = 1", false});
    return;
  }
  double dev = 0.0;
  for (const AInfinityBox& bx : ai.boxes) {
    const double oracle = poisson_a_infinity_ratio(g.base()[0], 1.0, bx.box.lo[0], bx.box.hi[0]);
    dev = std::max(dev, std::abs(bx.ratio / oracle - 1.0));
  }
  out.push_back(check(g.label, "max |A-inf ratio / Poisson value - 1|", dev, fmt::format("<= {}", th::kAInfinityOracle),
                      dev <= th::kAInfinityOracle, fmt::format("9 boxes; max ratio {:.6g}", ai.max_ratio)));
}

void c12_total_variation(Geometry& g, std::vector<Check>& out, size_t min_paths) {
  const HarmonicMeasure& s = g.solver16();
  const HarmonicMeasure& w = g.walker16();
  double sigma = 0.0;
  for (double e : w.error) sigma += 0.5 * e;
  const double tv = total_variation(s, w);
  const double limit = th::kTvSigmas * sigma + th::kTvSlack;
  Check c = check(g.label, "TV(solver, walker)", tv, fmt::format("<= {:.4g} (3 sigma + {})", limit, th::kTvSlack),
                  tv <= limit, fmt::format("16 cells; N = {}", g.paths()));
  if (g.paths() < min_paths) {
    c.status = CheckStatus::Underpowered;
    c.note = fmt::format("N = {} < {}", g.paths(), min_paths);
  }
  out.push_back(c);
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& cfg, Suite suite,
                        const std::function<void(const Criterion&)>& on_criterion) {
  std::vector<std::unique_ptr<Geometry>> owned;
  GeometrySpec flat_spec = cfg.geometry;
  flat_spec.kind = BoundaryKind::FlatPlane;
  GeometrySpec graph_spec = cfg.geometry;
  graph_spec.kind = BoundaryKind::LipschitzGraph;
  graph_spec.graph = cfg.verify.graph;
  const std::string base_dir =
      cfg.path.empty() ? std::string(".") : std::filesystem::path(cfg.path).parent_path().string();

  if (suite != Suite::Graph)
    owned.push_back(std::make_unique<Geometry>("flat", make_boundary(flat_spec), cfg, cfg.walker.params,
                                               cfg.walker.paths, splitmix(cfg.seed)));
  if (suite != Suite::Flat) {
    WalkerParams wp = cfg.walker.params;
    wp.dt0 = cfg.verify.graph_dt0;
    owned.push_back(std::make_unique<Geometry>("graph", make_boundary(graph_spec, base_dir.empty() ? "." : base_dir),
                                               cfg, wp, cfg.verify.graph_paths, splitmix(cfg.seed ^ 0x67726170ULL)));
  }
  std::vector<Geometry*> all;
  for (auto& g : owned) all.push_back(g.get());
  std::vector<Geometry*> flat = only_flat(all);
  const size_t min_paths = cfg.verify.min_paths;
  const double harnack_c = cfg.tolerances.harnack_c;

  struct Spec {
    int id;
    const char* title;
    bool flat_only;
    Body body;
  };
  const std::vector<Spec> specs = {
      {1, "Flat Poisson oracle (solver)", true, c1_solver_oracle},
      {2, "Flat Poisson oracle (walker)", true,
       [min_paths](Geometry& g, std::vector<Check>& o) { c2_walker_oracle(g, o, min_paths); }},
      {3, "Exact solutions", true, c3_exact_solutions},
      {4, "Ellipticity constant h-stable", false, c4_ellipticity},
      {5, "Ahlfors regularity", false, c5_ahlfors},
      {6, "Poincare ratios h-stable", false, c6_poincare},
      {7, "Harnack chain clearance", false,
       [harnack_c](Geometry& g, std::vector<Check>& o) { c7_harnack(g, o, harnack_c); }},
      {8, "Doubling", false, c8_doubling},
      {9, "Comparison principle h-stable", false, c9_comparison},
      {10, "Square-function bound (N_U)", false, c10_square_function},
      {11, "Carleson and A-infinity", false, c11_carleson},
      {12, "Solver-walker total variation", false,
       [min_paths](Geometry& g, std::vector<Check>& o) { c12_total_variation(g, o, min_paths); }},
  };

  VerifyReport report;
  report.suite = suite;
  for (const Spec& s : specs) {
    Criterion c;
    c.id = s.id;
    c.title = s.title;
    const auto t0 = Clock::now();
    for_geometries(s.flat_only ? flat : all, c.checks, s.body);
    c.seconds = seconds_since(t0);
    if (s.id == 11)
      for (Geometry* g : all) g->release_fields();
    if (on_criterion) on_criterion(c);
    report.criteria.push_back(std::move(c));
  }
  return report;
}

std::string format_criterion(const Criterion& c) {
  std::string line = fmt::format("[{}] C{:<2} {}:", to_string(c.status()), c.id, c.title);
  if (c.checks.empty()) line += " no checks in this suite";
  for (size_t i = 0; i < c.checks.size(); ++i) {
    const Check& k = c.checks[i];
    line += fmt::format("{} {} {} = {} ({})", i ? ";" : "", k.geometry, k.quantity, fmt_num(k.measured), k.threshold);
    if (k.status != CheckStatus::Pass) line += fmt::format(" {}", to_string(k.status));
    if (!k.note.empty()) line += fmt::format(" [{}]", k.note);
  }
  line += fmt::format(" ({:.1f} s)", c.seconds);
  return line;
}

void write_verify_csv(const VerifyReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(fmt::format("cannot open {} for writing", path));
  f << "criterion,geometry,quantity,measured,threshold,status\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const Criterion& c : report.criteria)
    for (const Check& k : c.checks)
      if (!k.timing)
        f << c.id << ',' << k.geometry << ',' << quote(k.quantity) << ',' << fmt::format("{:.17g}", k.measured) << ','
        << quote(k.threshold) << ',' << to_string(k.status) << '\n';
}

}  // namespace codim
