#include "codim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "codim/parallel.hpp"
#include "codim/poisson.hpp"
#include "codim/quadrature.hpp"

namespace codim {

// ---------------------------------------------------------------------------
// Partitions

namespace {

bool in_region(const ParamRegion& e, const Vec& y) {
  if (e.shape == ParamRegion::Shape::Ball) return norm(y - e.center) < e.radius;
  for (int k = 0; k < y.size(); ++k)
    if (y[k] < e.lo[k] || y[k] >= e.hi[k]) return false;
  return true;
}

// Bounding box of a region.
std::pair<Vec, Vec> bounds(const ParamRegion& e) {
  if (e.shape == ParamRegion::Shape::Box) return {e.lo, e.hi};
  Vec lo = e.center, hi = e.center;
  for (int k = 0; k < lo.size(); ++k) {
    lo[k] -= e.radius;
    hi[k] += e.radius;
  }
  return {lo, hi};
}

double unit_ball_volume(int d) { return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

// int over [a, b] of the area factor, d = 1.
double arc_measure(const BoundarySet& b, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (b.is_flat()) return hi - lo;
  static const quad::Rule rule = quad::gauss_legendre(8, 0.0, 1.0);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) * 16.0)));
  const double w = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p)
    for (size_t q = 0; q < rule.nodes.size(); ++q)
      sum += w * rule.weights[q] * b.area_factor(Vec{lo + w * (p + rule.nodes[q])});
  return sum;
}

// sigma of {y in E : indicator(y)} by a midpoint rule on the bounding box of E
// (d >= 2).
double sampled_measure(const BoundarySet& b, const ParamRegion& e, const std::function<bool(const Vec&)>& keep) {
  const int d = b.boundary_dim();
  const auto [lo, hi] = bounds(e);
  const int m = d == 2 ? 64 : 16;
  long long total = 1;
  for (int k = 0; k < d; ++k) total *= m;
  double cell = 1.0;
  for (int k = 0; k < d; ++k) cell *= (hi[k] - lo[k]) / m;
  double sum = 0.0;
  Vec y(d);
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      y[k] = lo[k] + (hi[k] - lo[k]) * ((rem % m) + 0.5) / m;
      rem /= m;
    }
    bool inside = true;
    if (e.shape == ParamRegion::Shape::Ball) inside = norm(y - e.center) < e.radius;
    if (inside && keep(y)) sum += cell * (b.is_flat() ? 1.0 : b.area_factor(y));
  }
  return sum;
}

// sigma(E intersect B(y, r)) in parameter space.
double measure_in_ball(const BoundarySet& b, const ParamRegion& e, const Vec& y, double r) {
  if (b.boundary_dim() == 1) {
    const auto [lo, hi] = bounds(e);
    return arc_measure(b, std::max(lo[0], y[0] - r), std::min(hi[0], y[0] + r));
  }
  return sampled_measure(b, e, [&](const Vec& p) { return norm(p - y) < r; });
}

SurfaceCell make_cell(const BoundarySet& b, const ParamRegion& e) {
  if (e.shape == ParamRegion::Shape::Box) {
    if (e.lo.size() != b.boundary_dim() || e.hi.size() != b.boundary_dim())
      throw InvalidArgument("cell dimension does not match the boundary");
    for (int k = 0; k < e.lo.size(); ++k)
      if (!(e.hi[k] > e.lo[k])) throw InvalidArgument("empty box cell");
  } else if (e.center.size() != b.boundary_dim() || !(e.radius > 0.0)) {
    throw InvalidArgument("invalid ball cell");
  }
  SurfaceCell c;
  c.region = e;
  if (e.shape == ParamRegion::Shape::Box) {
    c.center = 0.5 * (e.lo + e.hi);
    c.radius = 0.5 * (e.hi[0] - e.lo[0]);
  } else {
    c.center = e.center;
    c.radius = e.radius;
  }
  c.sigma = region_surface_measure(b, e);
  return c;
}

}  // namespace

double region_surface_measure(const BoundarySet& b, const ParamRegion& e) {
  const int d = b.boundary_dim();
  if (d == 1) {
    const auto [lo, hi] = bounds(e);
    return arc_measure(b, lo[0], hi[0]);
  }
  if (b.is_flat()) {
    if (e.shape == ParamRegion::Shape::Ball) return unit_ball_volume(d) * std::pow(e.radius, d);
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= e.hi[k] - e.lo[k];
    return v;
  }
  return sampled_measure(b, e, [](const Vec&) { return true; });
}

Partition make_partition(const BoundarySet& b, std::vector<ParamRegion> regions) {
  Partition p;
  p.cells.reserve(regions.size());
  for (const ParamRegion& e : regions) p.cells.push_back(make_cell(b, e));
  return p;
}

Partition box_partition(const BoundarySet& b, const Vec& lo, const Vec& hi, int per_axis) {
  const int d = b.boundary_dim();
  if (per_axis < 1) throw InvalidArgument("partition needs at least one cell per axis");
  if (lo.size() != d || hi.size() != d) throw InvalidArgument("partition box dimension does not match the boundary");
  long long total = 1;
  for (int k = 0; k < d; ++k) total *= per_axis;
  std::vector<ParamRegion> regions;
  for (long long idx = 0; idx < total; ++idx) {
    ParamRegion e;
    e.lo = Vec(d);
    e.hi = Vec(d);
    long long rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      const long long i = rem % per_axis;
      rem /= per_axis;
      const double w = (hi[k] - lo[k]) / per_axis;
      e.lo[k] = lo[k] + w * static_cast<double>(i);
      e.hi[k] = i + 1 == per_axis ? hi[k] : lo[k] + w * static_cast<double>(i + 1);
    }
    regions.push_back(e);
  }
  return make_partition(b, std::move(regions));
}

Partition refine(const BoundarySet& b, const Partition& partition) {
  std::vector<ParamRegion> regions;
  for (const SurfaceCell& c : partition.cells) {
    if (c.region.shape != ParamRegion::Shape::Box) {
      regions.push_back(c.region);
      continue;
    }
    ParamRegion left = c.region, right = c.region;
    const double mid = 0.5 * (c.region.lo[0] + c.region.hi[0]);
    left.hi[0] = mid;
    right.lo[0] = mid;
    regions.push_back(left);
    regions.push_back(right);
  }
  return make_partition(b, std::move(regions));
}

const char* to_string(Provenance p) { return p == Provenance::Solver ? "SOLVER" : "WALKER"; }

double HarmonicMeasure::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

DensityProfile density(const HarmonicMeasure& omega) {
  DensityProfile out;
  out.partition = omega.partition;
  out.mass = omega.mass;
  out.error = omega.error;
  for (size_t j = 0; j < omega.mass.size(); ++j) out.k.push_back(omega.mass[j] / omega.partition.cells[j].sigma);
  return out;
}

// ---------------------------------------------------------------------------
// Solver route

HarmonicRepresentation::HarmonicRepresentation(const LinearSystem& system, const Vec& x, const SolveOptions& options)
    : grid_(system.grid_ptr()), base_(x) {
  const GridDomain& g = *grid_;
  if (x.size() != g.dim()) throw InvalidArgument("base point dimension does not match the grid");
  for (int k = 0; k < x.size(); ++k)
    if (std::abs(x[k]) >= g.half_width() - g.spacing()) throw PreconditionError("base point too close to the box");
  if (distance(g.boundary(), x) <= g.eps_abs() + g.spacing() * std::sqrt(static_cast<double>(g.dim())))
    throw PreconditionError("base point is not an interior point of the grid");
  const AdjointWeights adj = solve_adjoint(system, x, options);
  stats_ = adj.stats;
  const BoundarySet& b = g.boundary();
  const int d = b.boundary_dim();
  for (const auto& [j, mu] : adj.weights) {
    if (g.node_class(j) == NodeClass::GammaTube) {
      tube_.push_back({mu, g.nearest_param(j)});
    } else {
      const Vec pos = g.position(j);
      shell_.push_back({mu, pos.slice(0, d), g.delta(j)});
    }
  }
}

double HarmonicRepresentation::integrate_tube(const BoundaryData& g) const {
  double s = 0.0;
  for (const TubeEntry& e : tube_) s += e.mu * g(e.param);
  return s;
}

double HarmonicRepresentation::integrate(const BoundaryData& g) const {
  const BoundarySet& b = grid_->boundary();
  const double shell = parallel_sum(shell_.size(), 1024, [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += shell_[i].mu * poisson_integral(b, g, shell_[i].foot, shell_[i].height);
    return s;
  });
  return integrate_tube(g) + shell;
}

double HarmonicRepresentation::collar_mass(const ParamRegion& e, double eta) const {
  auto in_collar = [&](const Vec& y) {
    if (e.shape == ParamRegion::Shape::Ball) return std::abs(norm(y - e.center) - e.radius) < eta;
    bool inside_grown = true, inside_shrunk = true;
    for (int k = 0; k < y.size(); ++k) {
      inside_grown = inside_grown && y[k] > e.lo[k] - eta && y[k] < e.hi[k] + eta;
      inside_shrunk = inside_shrunk && y[k] > e.lo[k] + eta && y[k] < e.hi[k] - eta;
    }
    return inside_grown && !inside_shrunk;
  };
  double s = 0.0;
  for (const TubeEntry& t : tube_)
    if (in_collar(t.param)) s += t.mu;
  // Shell part in closed form for d = 1; for d >= 2 the collar is far from
  // the shell for cells inside the box and the tube part is kept alone.
  if (grid_->boundary().boundary_dim() == 1) {
    const auto [lo, hi] = bounds(e);
    for (const ShellEntry& sh : shell_) {
      if (sh.height <= 0.0) continue;
      s += sh.mu * (poisson_interval(sh.foot[0], sh.height, lo[0] - eta, lo[0] + eta) +
                    poisson_interval(sh.foot[0], sh.height, hi[0] - eta, hi[0] + eta));
    }
  }
  return s;
}

BoundaryData cell_indicator(const ParamRegion& e, double eta) {
  if (e.shape == ParamRegion::Shape::Ball) return BoundaryData::indicator_ball(e.center, e.radius, eta);
  return BoundaryData::indicator_box(e.lo, e.hi, eta);
}

std::vector<double> indicator_overlap(const BoundarySet& b, const Partition& partition, double eta) {
  const int d = b.boundary_dim();
  std::vector<BoundaryData> data;
  Vec lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  for (const SurfaceCell& c : partition.cells) {
    data.push_back(cell_indicator(c.region, eta));
    const auto [clo, chi] = bounds(c.region);
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], clo[k] - eta);
      hi[k] = std::max(hi[k], chi[k] + eta);
    }
  }
  std::vector<double> out(data.size(), 0.0);
  std::vector<std::pair<size_t, double>> active;
  for (const QuadratureNode& q : b.quadrature()) {
    bool inside = true;
    for (int k = 0; k < d; ++k) inside = inside && q.param[k] >= lo[k] && q.param[k] <= hi[k];
    if (!inside) continue;
    active.clear();
    for (size_t c = 0; c < data.size(); ++c) {
      const double v = data[c](q.param);
      if (v > 0.0) active.emplace_back(c, v);
    }
    for (size_t i = 0; i < active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j) {
        const double m = q.weight * std::min(active[i].second, active[j].second);
        out[active[i].first] += m;
        out[active[j].first] += m;
      }
  }
  for (size_t c = 0; c < out.size(); ++c) out[c] /= partition.cells[c].sigma;
  return out;
}

namespace {

void check_overlap(const BoundarySet& b, const Partition& partition, double eta) {
  const std::vector<double> overlap = indicator_overlap(b, partition, eta);
  for (size_t j = 0; j < overlap.size(); ++j)
    if (overlap[j] > 0.1)
      throw PartitionError(fmt::format("indicator of cell {} overlaps its neighbours on {:.1f}% of the cell", j,
                                       100.0 * overlap[j]));
}

void check_eta(const BoundarySet& b, double eta) {
  if (!(eta >= 4.0 * b.quadrature_spacing() * (1.0 - 1e-12)))
    throw InvalidArgument(fmt::format("mollification width {} below 4 h_Gamma = {}", eta, 4.0 * b.quadrature_spacing()));
}

}  // namespace

HarmonicMeasure measure_from_solver(const HarmonicRepresentation& rep, const Partition& partition, double eta) {
  const BoundarySet& b = rep.grid().boundary();
  check_eta(b, eta);
  check_overlap(b, partition, eta);
  HarmonicMeasure out;
  out.base = rep.base();
  out.provenance = Provenance::Solver;
  out.partition = partition;
  std::vector<BoundaryData> data;
  for (const SurfaceCell& c : partition.cells) data.push_back(cell_indicator(c.region, eta));
  for (size_t j = 0; j < data.size(); ++j) {
    out.mass.push_back(std::clamp(rep.integrate(data[j]), 0.0, 1.0));
    out.error.push_back(rep.collar_mass(partition.cells[j].region, eta));
  }
  out.deficit = 1.0 - rep.integrate(BoundaryData::constant(1.0));
  return out;
}

HarmonicMeasure measure_from_solver(const LinearSystem& system, const Vec& x, const Partition& partition,
                                    double eta, const SolveOptions& options) {
  return measure_from_solver(HarmonicRepresentation(system, x, options), partition, eta);
}

HarmonicMeasure measure_from_solver_per_cell(const LinearSystem& system, const Vec& x, const Partition& partition,
                                             double eta, const SolveOptions& options) {
  const BoundarySet& b = system.grid().boundary();
  check_eta(b, eta);
  check_overlap(b, partition, eta);
  HarmonicMeasure out;
  out.base = x;
  out.provenance = Provenance::Solver;
  out.partition = partition;
  LinearSystem sys = system;
  for (const SurfaceCell& c : partition.cells) {
    const BoundaryData g = cell_indicator(c.region, eta);
    sys.set_dirichlet(g, poisson_extension(b, g));
    out.mass.push_back(std::clamp(interpolate(solve(sys, options), x), 0.0, 1.0));
    out.error.push_back(0.0);
  }
  sys.set_dirichlet(BoundaryData::constant(1.0), [](const Vec&) { return 1.0; });
  out.deficit = 1.0 - interpolate(solve(sys, options), x);
  return out;
}

// ---------------------------------------------------------------------------
// Walker route

HarmonicMeasure estimate_measure(const PathEnsemble& ensemble, const Partition& partition,
                                 Normalization normalization) {
  if (ensemble.absorbed == 0) throw PreconditionError("ensemble has no absorbed paths");
  HarmonicMeasure out;
  out.base = ensemble.base;
  out.provenance = Provenance::Walker;
  out.partition = partition;
  std::vector<size_t> counts(partition.size(), 0);
  for (const PathRecord& p : ensemble.paths) {
    if (p.outcome != PathOutcome::Absorbed) continue;
    for (size_t j = 0; j < partition.size(); ++j)
      if (in_region(partition.cells[j].region, p.param)) ++counts[j];
  }
  const double n = static_cast<double>(normalization == Normalization::Absorbed ? ensemble.absorbed : ensemble.size());
  for (size_t c : counts) {
    const double p = static_cast<double>(c) / n;
    out.mass.push_back(p);
    out.error.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  out.deficit = ensemble.deficit();
  return out;
}

// ---------------------------------------------------------------------------
// Doubling, comparison, total variation

double ball_mass(const HarmonicMeasure& omega, const BoundarySet& b, const Vec& y, double r) {
  double mass = 0.0, covered = 0.0;
  for (size_t j = 0; j < omega.partition.size(); ++j) {
    const SurfaceCell& c = omega.partition.cells[j];
    const double part = measure_in_ball(b, c.region, y, r);
    if (part <= 0.0) continue;
    covered += part;
    mass += omega.mass[j] * std::min(1.0, part / c.sigma);
  }
  ParamRegion ball;
  ball.shape = ParamRegion::Shape::Ball;
  ball.center = y;
  ball.radius = r;
  const double full = region_surface_measure(b, ball);
  if (covered < full * (1.0 - 1e-6)) throw PreconditionError("partition does not cover the ball");
  return mass;
}

double doubling_ratio(const HarmonicMeasure& omega, const BoundarySet& b, const Vec& y, double r) {
  if (std::abs(y[0]) + 2.0 * r > b.window_radius()) throw OutOfWindowError("doubled ball leaves the window");
  const double inner = ball_mass(omega, b, y, r);
  if (!(inner > 0.0)) throw UndefinedRatioError("harmonic measure of the ball is zero");
  return ball_mass(omega, b, y, 2.0 * r) / inner;
}

double comparison_ratio(const ScalarField& u, const ScalarField& v, const Vec& param, double r) {
  const GridDomain& g = *u.grid;
  if (v.grid.get() != u.grid.get() && v.grid->size() != g.size()) throw InvalidArgument("fields on different grids");
  const Vec x = g.boundary().lift(param);
  double umax = 0.0, vmax = 0.0;
  g.for_each_in_ball(x, 2.0 * r, [&](size_t i) {
    if (g.node_class(i) != NodeClass::Interior) return;
    if (!(u[i] > 0.0) || !(v[i] > 0.0)) throw PreconditionError("comparison needs u, v > 0 on the doubled ball");
    umax = std::max(umax, u[i]);
    vmax = std::max(vmax, v[i]);
  });
  if (umax == 0.0) throw ResolutionError("doubled ball contains no interior grid nodes");
  if (!trace_vanishes(u, param, 2.0 * r, 1e-2 * umax) || !trace_vanishes(v, param, 2.0 * r, 1e-2 * vmax))
    throw PreconditionError("comparison needs vanishing traces on the doubled ball");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  g.for_each_in_ball(x, r, [&](size_t i) {
    if (g.node_class(i) != NodeClass::Interior) return;
    const double q = u[i] / v[i];
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  });
  if (hi == 0.0) throw ResolutionError("ball contains no interior grid nodes");
  return hi / lo;
}

double total_variation(const HarmonicMeasure& a, const HarmonicMeasure& b) {
  if (a.mass.size() != b.mass.size()) throw InvalidArgument("measures on different partitions");
  double s = 0.0;
  for (size_t j = 0; j < a.mass.size(); ++j) s += std::abs(a.mass[j] - b.mass[j]);
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// A-infinity

ParamRegion cube(const Vec& center, double side) {
  ParamRegion q;
  q.lo = center;
  q.hi = center;
  for (int k = 0; k < center.size(); ++k) {
    q.lo[k] -= 0.5 * side;
    q.hi[k] += 0.5 * side;
  }
  return q;
}

AInfinityResult a_infinity_diagnostic(const DensityProfile& k, std::span<const ParamRegion> boxes) {
  AInfinityResult out;
  for (size_t q = 0; q < boxes.size(); ++q) {
    AInfinityBox box;
    box.box = boxes[q];
    double sig = 0.0, mass = 0.0, logs = 0.0;
    for (size_t j = 0; j < k.k.size(); ++j) {
      const SurfaceCell& c = k.partition.cells[j];
      bool inside = true;
      for (int a = 0; a < c.center.size(); ++a)
        inside = inside && c.center[a] >= boxes[q].lo[a] && c.center[a] <= boxes[q].hi[a];
      if (!inside) continue;
      ++box.cells;
      sig += c.sigma;
      mass += c.sigma * k.k[j];
      if (k.k[j] <= 0.0) box.infinite = true;
      else logs += c.sigma * std::log(k.k[j]);
    }
    if (box.cells == 0) {
      out.notes.push_back(fmt::format("box {} contains no cells; skipped", q));
      continue;
    }
    if (box.infinite) {
      box.ratio = std::numeric_limits<double>::infinity();
      out.flagged = true;
    } else {
      box.ratio = std::max(1.0, (mass / sig) / std::exp(logs / sig));
    }
    out.max_ratio = std::max(out.max_ratio, box.ratio);
    out.boxes.push_back(box);
  }
  return out;
}

double poisson_a_infinity_ratio(double x, double s, double a, double b, int points) {
  const double w = (b - a) / points;
  double mean = 0.0, logs = 0.0;
  for (int i = 0; i < points; ++i) {
    const double y = a + (i + 0.5) * w;
    const double k = s / (std::numbers::pi * ((y - x) * (y - x) + s * s));
    mean += k;
    logs += std::log(k);
  }
  return (mean / points) / std::exp(logs / points);
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw Error(fmt::format("cannot open {} for writing", path));
  return f;
}

void measure_header(std::ofstream& f, int d) {
  f << "cell_id";
  for (int k = 1; k <= d; ++k) f << ",center" << k;
  f << ",radius,sigma,mass,stderr";
}

void measure_row(std::ofstream& f, size_t j, const SurfaceCell& c, double mass, double error) {
  f << j;
  for (int k = 0; k < c.center.size(); ++k) f << fmt::format(",{:.17g}", c.center[k]);
  f << fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g}", c.radius, c.sigma, mass, error);
}

}  // namespace

void write_measure_csv(const HarmonicMeasure& omega, const std::string& path) {
  std::ofstream f = open_out(path);
  const int d = omega.partition.size() ? omega.partition.cells[0].center.size() : 0;
  measure_header(f, d);
  f << '\n';
  for (size_t j = 0; j < omega.mass.size(); ++j) {
    measure_row(f, j, omega.partition.cells[j], omega.mass[j], omega.error[j]);
    f << '\n';
  }
}

void write_density_csv(const DensityProfile& k, const std::string& path) {
  std::ofstream f = open_out(path);
  const int d = k.partition.size() ? k.partition.cells[0].center.size() : 0;
  measure_header(f, d);
  f << ",density\n";
  for (size_t j = 0; j < k.k.size(); ++j) {
    measure_row(f, j, k.partition.cells[j], k.mass[j], k.error[j]);
    f << fmt::format(",{:.17g}\n", k.k[j]);
  }
}

void append_diagnostics_csv(std::span<const DiagnosticRow> rows, const std::string& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream f = open_out(path, std::ios::app);
  if (fresh) f << "name,params,value\n";
  for (const DiagnosticRow& r : rows) {
    if (r.name.find_first_of(",\n\"") != std::string::npos || r.params.find_first_of(",\n\"") != std::string::npos)
      throw InvalidArgument("diagnostic names and parameters may not contain commas, quotes or newlines");
    f << r.name << ',' << r.params << ',' << fmt::format("{:.17g}", r.value) << '\n';
  }
}

}  // namespace codim
