#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "codim/measure.hpp"
#include "codim/poisson.hpp"

namespace codim {
namespace {

constexpr double kPi = std::numbers::pi;

BoundarySet flat_line() { return BoundarySet::flat(3, 1); }

struct FlatSetup {
  std::shared_ptr<const GridDomain> grid;
  ScalarField a;
  LinearSystem system;
  HarmonicRepresentation rep;
};

const FlatSetup& flat_setup() {
  static const FlatSetup s = [] {
    auto g = std::make_shared<GridDomain>(flat_line(), GridSpec{2.0, 1.0 / 16.0, 0.0});
    ScalarField a = build_weight(g, WeightVariant::Smoothed, 1.0);
    LinearSystem sys(g, a);
    HarmonicRepresentation rep(sys, Vec{0.0, 0.0, 1.0}, SolveOptions{1e-10, 50000});
    return FlatSetup{g, a, sys, rep};
  }();
  return s;
}

ParamRegion interval(double a, double b) {
  ParamRegion e;
  e.lo = Vec{a};
  e.hi = Vec{b};
  return e;
}

// Exact Poisson masses of a partition seen from (0, s).
HarmonicMeasure poisson_measure(const BoundarySet& b, const Partition& p, double s) {
  HarmonicMeasure m;
  m.base = Vec{0.0, 0.0, s};
  m.partition = p;
  for (const SurfaceCell& c : p.cells) {
    m.mass.push_back(poisson_interval(0.0, s, c.region.lo[0], c.region.hi[0]));
    m.error.push_back(0.0);
  }
  (void)b;
  return m;
}

TEST(Partition, BoxesTileAndRefine) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 8);
  ASSERT_EQ(p.size(), 8u);
  double total = 0.0;
  for (const SurfaceCell& c : p.cells) total += c.sigma;
  EXPECT_NEAR(total, 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(p.cells[0].center[0], -0.875);
  EXPECT_DOUBLE_EQ(p.cells[0].radius, 0.125);
  const Partition r = refine(b, p);
  ASSERT_EQ(r.size(), 16u);
  EXPECT_DOUBLE_EQ(r.cells[1].region.lo[0], r.cells[0].region.hi[0]);
}

TEST(Partition, GraphCellMeasureMatchesArclength) {
  const BoundarySet g = BoundarySet::graph(3, std::make_shared<SinusoidalGraph>(1, 2, 0.1, 2.0));
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double y) { return std::sqrt(1.0 + 0.01 * std::cos(2.0 * y) * std::cos(2.0 * y)); }, -0.3, 0.9, 15, 1e-13);
  EXPECT_NEAR(region_surface_measure(g, interval(-0.3, 0.9)), oracle, 1e-10);
}

TEST(SolverMeasure, FlatUnitIntervalMatchesHalfPlaneOracle) {
  const FlatSetup& s = flat_setup();
  const Partition p = make_partition(s.grid->boundary(), {interval(-1.0, 1.0)});
  const HarmonicMeasure m = measure_from_solver(s.rep, p, 1.0 / 64.0);
  EXPECT_NEAR(m.mass[0], 0.5, 0.025);
  EXPECT_NEAR(m.deficit, 0.0, 1e-8);
  EXPECT_GT(m.error[0], 0.0);
  EXPECT_LT(m.error[0], 0.05);
}

TEST(SolverMeasure, WholeWindowCarriesAlmostAllMass) {
  const FlatSetup& s = flat_setup();
  const Partition p = make_partition(s.grid->boundary(), {interval(-16.0, 16.0)});
  const HarmonicMeasure m = measure_from_solver(s.rep, p, 1.0 / 64.0);
  EXPECT_NEAR(m.mass[0], 2.0 / kPi * std::atan(16.0), 0.01);
}

TEST(SolverMeasure, MirrorCellsHaveEqualMass) {
  const FlatSetup& s = flat_setup();
  const Partition p = make_partition(s.grid->boundary(), {interval(0.2, 0.7), interval(-0.7, -0.2)});
  const HarmonicMeasure m = measure_from_solver(s.rep, p, 1.0 / 64.0);
  EXPECT_NEAR(m.mass[0], m.mass[1], 1e-8);
}

TEST(SolverMeasure, AdjointRouteMatchesPerCellSolves) {
  const FlatSetup& s = flat_setup();
  const Partition p = box_partition(s.grid->boundary(), Vec{-1.0}, Vec{1.0}, 4);
  const HarmonicMeasure adj = measure_from_solver(s.rep, p, 1.0 / 64.0);
  const HarmonicMeasure per = measure_from_solver_per_cell(s.system, Vec{0.0, 0.0, 1.0}, p, 1.0 / 64.0,
                                                           SolveOptions{1e-10, 50000});
  for (size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(adj.mass[j], per.mass[j], 1e-7);
  EXPECT_NEAR(adj.deficit, per.deficit, 1e-7);
}

TEST(SolverMeasure, RefinementPreservesBoxMasses) {
  const FlatSetup& s = flat_setup();
  const Partition p = box_partition(s.grid->boundary(), Vec{-2.0}, Vec{2.0}, 8);
  const HarmonicMeasure coarse = measure_from_solver(s.rep, p, 1.0 / 64.0);
  const HarmonicMeasure fine = measure_from_solver(s.rep, refine(s.grid->boundary(), p), 1.0 / 64.0);
  for (size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(fine.mass[2 * j] + fine.mass[2 * j + 1], coarse.mass[j], 1e-10);
}

TEST(SolverMeasure, IndicatorOverlapOfTwoCells) {
  // Shared edge: 2 eta int_{-1}^{0} S = 2 eta * 5/32 for the quintic step.
  const BoundarySet b = BoundarySet::flat(3, 1, BoundaryOptions{16.0, 1.0 / 1024.0});
  const double eta = 1.0 / 64.0;
  const std::vector<double> o = indicator_overlap(b, box_partition(b, Vec{-1.0}, Vec{1.0}, 2), eta);
  EXPECT_NEAR(o[0], 0.3125 * eta, 1e-5);
  EXPECT_NEAR(o[1], o[0], 1e-12);
}

TEST(SolverMeasure, RejectsFinePartitionsAndNarrowMollifiers) {
  const FlatSetup& s = flat_setup();
  const BoundarySet& b = s.grid->boundary();
  EXPECT_THROW(measure_from_solver(s.rep, box_partition(b, Vec{-1.0}, Vec{1.0}, 64), 1.0 / 64.0), PartitionError);
  EXPECT_THROW(measure_from_solver(s.rep, box_partition(b, Vec{-1.0}, Vec{1.0}, 2), 1.0 / 512.0), InvalidArgument);
  EXPECT_THROW(HarmonicRepresentation(s.system, Vec{0.0, 0.05, 0.0}), PreconditionError);
}

PathEnsemble synthetic_ensemble(std::initializer_list<double> params, size_t escaped) {
  PathEnsemble e;
  e.base = Vec{0.0, 0.0, 1.0};
  for (double y : params) {
    PathRecord r;
    r.outcome = PathOutcome::Absorbed;
    r.param = Vec{y};
    r.point = Vec{y, 0.0, 0.0};
    e.paths.push_back(r);
    ++e.absorbed;
  }
  for (size_t i = 0; i < escaped; ++i) {
    e.paths.push_back(PathRecord{PathOutcome::Escaped, Vec{100.0, 0.0, 0.0}, Vec{}, 10});
    ++e.escaped;
  }
  return e;
}

TEST(WalkerMeasure, SingleCellCarriesAllMass) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 4);
  const HarmonicMeasure m = estimate_measure(synthetic_ensemble({0.1, 0.2, 0.3, 0.45}, 0), p);
  EXPECT_DOUBLE_EQ(m.mass[2], 1.0);
  EXPECT_DOUBLE_EQ(m.total(), 1.0);
  EXPECT_DOUBLE_EQ(m.error[2], 0.0);
}

TEST(WalkerMeasure, NormalizationAndDeficit) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 2);
  const PathEnsemble e = synthetic_ensemble({-0.5, 0.5, 0.0, 3.0}, 4);
  const HarmonicMeasure abs = estimate_measure(e, p);
  EXPECT_DOUBLE_EQ(abs.mass[0], 0.25);
  EXPECT_DOUBLE_EQ(abs.mass[1], 0.5);  // half-open cells: 0 belongs to the right one
  EXPECT_DOUBLE_EQ(abs.deficit, 0.5);
  const HarmonicMeasure all = estimate_measure(e, p, Normalization::AllPaths);
  EXPECT_DOUBLE_EQ(all.mass[1], 0.25);
  EXPECT_NEAR(all.error[1], std::sqrt(0.25 * 0.75 / 8.0), 1e-15);
  EXPECT_THROW(estimate_measure(synthetic_ensemble({}, 3), p), PreconditionError);
}

TEST(WalkerMeasure, FlatPoissonMassOfTheDoubledInterval) {
  const BoundarySet b = flat_line();
  const PathEnsemble e = sample_paths(b, Vec{0.0, 0.0, 1.0}, 20000, 99);
  const Partition p = make_partition(b, {interval(-2.0, 2.0), interval(0.0, 1.0), interval(-1.0, 0.0)});
  const HarmonicMeasure m = estimate_measure(e, p, Normalization::AllPaths);
  EXPECT_NEAR(m.mass[0], 2.0 / kPi * std::atan(2.0), 3.0 * m.error[0]);
  EXPECT_NEAR(m.mass[1], m.mass[2], 3.0 * std::sqrt(m.error[1] * m.error[1] + m.error[2] * m.error[2]));
}

TEST(Doubling, SurfaceMeasureDoublesExactly) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-4.0}, Vec{4.0}, 32);
  HarmonicMeasure sigma;
  sigma.partition = p;
  for (const SurfaceCell& c : p.cells) {
    sigma.mass.push_back(c.sigma);
    sigma.error.push_back(0.0);
  }
  EXPECT_NEAR(doubling_ratio(sigma, b, Vec{0.3}, 0.7), 2.0, 1e-12);
  EXPECT_NEAR(doubling_ratio(sigma, b, Vec{0.0}, 1.0), 2.0, 1e-12);
}

TEST(Doubling, FlatPoissonMeasureMatchesArctanFormula) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-4.0}, Vec{4.0}, 64);
  const HarmonicMeasure m = poisson_measure(b, p, 1.0);
  // Ball endpoints fall on cell boundaries, so the cell sums are exact.
  EXPECT_NEAR(doubling_ratio(m, b, Vec{0.0}, 1.0), 4.0 / kPi * std::atan(2.0), 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.5, 1.5), r(0.1, 1.0);
  for (int i = 0; i < 20; ++i) EXPECT_GE(doubling_ratio(m, b, Vec{u(rng)}, r(rng)), 1.0);
  EXPECT_THROW(ball_mass(m, b, Vec{3.9}, 0.5), PreconditionError);
}

TEST(Comparison, ScaleFreeAndTrivialCases) {
  const FlatSetup& s = flat_setup();
  auto cyl = [](const Vec& x) { return std::hypot(x[1], x[2]); };
  const ScalarField u = sample_field(s.grid, cyl);
  ScalarField u3 = u;
  for (double& v : u3.values) v *= 3.0;
  EXPECT_DOUBLE_EQ(comparison_ratio(u, u, Vec{0.0}, 0.5), 1.0);
  EXPECT_NEAR(comparison_ratio(u, u3, Vec{0.0}, 0.5), 1.0, 1e-14);
  ScalarField neg = u;
  neg.values[s.grid->nearest_node(Vec{0.0, 0.3, 0.3})] = -1.0;
  EXPECT_THROW(comparison_ratio(u, neg, Vec{0.0}, 0.5), PreconditionError);
  const ScalarField one(s.grid, 1.0);
  EXPECT_THROW(comparison_ratio(u, one, Vec{0.0}, 0.5), PreconditionError);
}

TEST(Comparison, RadiusAgainstSolutionIsBoundedAndScaleInvariant) {
  const FlatSetup& s = flat_setup();
  LinearSystem sys = s.system;
  const BoundaryData g = BoundaryData::combine(1.0, BoundaryData::constant(1.0), -1.0,
                                               BoundaryData::indicator_box(Vec{-1.0}, Vec{1.0}, 1.0 / 64.0));
  sys.set_dirichlet(g, [](const Vec&) { return 1.0; });
  const ScalarField v = solve(sys, SolveOptions{1e-10, 50000});
  const ScalarField u = sample_field(s.grid, [](const Vec& x) { return std::hypot(x[1], x[2]); });
  const double c = comparison_ratio(u, v, Vec{0.0}, 0.25);
  EXPECT_GE(c, 1.0);
  EXPECT_LT(c, 10.0);
  ScalarField u2 = u, v2 = v;
  for (double& x : u2.values) x *= 0.1;
  for (double& x : v2.values) x *= 7.0;
  EXPECT_NEAR(comparison_ratio(u2, v2, Vec{0.0}, 0.25), c, 1e-12 * c);
}

TEST(AInfinity, ConstantDensityGivesOne) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 16);
  DensityProfile k;
  k.partition = p;
  k.k.assign(16, 0.7);
  const ParamRegion boxes[] = {cube(Vec{0.0}, 2.0), cube(Vec{0.5}, 0.5), cube(Vec{10.0}, 0.5)};
  const AInfinityResult r = a_infinity_diagnostic(k, boxes);
  ASSERT_EQ(r.boxes.size(), 2u);
  for (const AInfinityBox& box : r.boxes) EXPECT_NEAR(box.ratio, 1.0, 1e-12);
  EXPECT_EQ(r.notes.size(), 1u);
  k.k[3] = 0.0;
  const AInfinityResult z = a_infinity_diagnostic(k, boxes);
  EXPECT_TRUE(z.flagged);
  EXPECT_TRUE(std::isinf(z.max_ratio));
}

TEST(AInfinity, JensenLowerBound) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 16);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  DensityProfile k;
  k.partition = p;
  for (int i = 0; i < 16; ++i) k.k.push_back(u(rng));
  const ParamRegion boxes[] = {cube(Vec{0.0}, 2.0), cube(Vec{-0.5}, 1.0)};
  for (const AInfinityBox& box : a_infinity_diagnostic(k, boxes).boxes) EXPECT_GT(box.ratio, 1.0 + 1e-6);
}

TEST(AInfinity, FlatPoissonDensityMatchesKernelQuadrature) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 16);
  const DensityProfile k = density(poisson_measure(b, p, 1.0));
  const ParamRegion q[] = {cube(Vec{0.0}, 2.0)};
  const double cells = a_infinity_diagnostic(k, q).max_ratio;
  // Independent continuum value of avg P / exp(avg log P) on [-1, 1].
  const double avg = 0.5 * poisson_interval(0.0, 1.0, -1.0, 1.0);
  const double avg_log = -std::log(kPi) - boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                              [](double y) { return std::log1p(y * y); }, -1.0, 1.0, 15, 1e-14) /
                                              2.0;
  const double oracle = avg / std::exp(avg_log);
  EXPECT_NEAR(poisson_a_infinity_ratio(0.0, 1.0, -1.0, 1.0), oracle, 1e-6);
  EXPECT_NEAR(cells, oracle, 0.02 * oracle);
}

TEST(SquareFunction, ConstantFieldHasZeroSquareFunction) {
  const FlatSetup& s = flat_setup();
  const SquareFunctionResult r = square_function(ScalarField(s.grid, 2.0), Vec{0.0}, 0.5);
  EXPECT_DOUBLE_EQ(r.s_norm2, 0.0);
  EXPECT_DOUBLE_EQ(r.ratio(NontangentialVariant::Value), 0.0);
  EXPECT_NEAR(r.trace_norm2, 4.0 * (0.5 + 1.0 / 16.0), 1e-12);
  EXPECT_THROW(square_function(ScalarField(s.grid, 2.0), Vec{0.0}, 0.1), ResolutionError);
}

double radius_square_function(double h, double l) {
  auto g = std::make_shared<GridDomain>(flat_line(), GridSpec{2.0, h, 0.0});
  const ScalarField u = sample_field(g, [](const Vec& x) { return std::hypot(x[1], x[2]); });
  const SquareFunctionResult r = square_function(u, Vec{0.0}, l);
  return r.s_values[r.s_values.size() / 2];
}

TEST(SquareFunction, RadiusMatchesConeIntegral) {
  // |grad |t|| = 1: S^2 = int_{|s|<l} int_{|y|<=|s|} (y^2+|s|^2)^{-1/2} dy ds = 2 pi asinh(1) l^2
  // minus the tube |s| <= eps.
  const double l = 1.0;
  for (double h : {1.0 / 16.0, 1.0 / 32.0}) {
    const double eps = 2.0 * h;
    const double oracle = std::sqrt(2.0 * kPi * std::asinh(1.0) * (l * l - eps * eps));
    EXPECT_NEAR(radius_square_function(h, l), oracle, 0.05 * oracle) << "h = " << h;
  }
}

TEST(Carleson, ZeroAndRadius) {
  const FlatSetup& s = flat_setup();
  const GridDomain& g = *s.grid;
  const ParamRegion boxes[] = {cube(Vec{0.0}, 0.5), cube(Vec{0.25}, 1.0)};
  const CarlesonResult zero = carleson_norm(g, [](size_t) { return 0.0; }, boxes);
  EXPECT_DOUBLE_EQ(zero.value, 0.0);
  EXPECT_FALSE(zero.flagged);
  // f = |t|: mu(Q x {eps < |t| < l}) / l = pi (l^2 - eps^2).
  const CarlesonResult r = carleson_norm(
      g, [&](size_t i) { return std::hypot(g.position(i)[1], g.position(i)[2]); }, boxes);
  const double eps = g.eps_abs();
  EXPECT_NEAR(r.value, kPi * (1.0 - eps * eps), 0.05 * kPi);
  EXPECT_EQ(r.worst_box, 1u);
  EXPECT_NEAR(r.growth, (1.0 - eps * eps) / (1.0 - 4.0 * eps * eps), 0.02);
}

// Exact flat solution for the indicator of [a, b]: the half-plane Poisson
// extension in (x, s = |t|). Its Carleson mass is integrated in closed form
// over s-slices with Gauss-Kronrod in x.
double exact_indicator_solution(double a, double b, double x, double s) {
  return (std::atan((b - x) / s) - std::atan((a - x) / s)) / kPi;
}

double exact_carleson_mass(double a, double b, double c, double l, double cut) {
  using boost::math::quadrature::gauss_kronrod;
  auto grad2 = [&](double x, double s) {
    auto g = [&](double e) {
      const double r2 = (e - x) * (e - x) + s * s;
      return std::pair{-s / r2, (e - x) / r2};
    };
    const auto [bx, bs] = g(b);
    const auto [ax, as] = g(a);
    return ((bx - ax) * (bx - ax) + (bs - as) * (bs - as)) / (kPi * kPi);
  };
  auto slice = [&](double s) {
    return 2.0 * kPi * s *
           gauss_kronrod<double, 61>::integrate([&](double x) { return grad2(x, s); }, c - l / 2, c + l / 2, 15, 1e-10);
  };
  return gauss_kronrod<double, 61>::integrate(slice, cut, l, 15, 1e-9);
}

TEST(Carleson, IndicatorSolutionMatchesClosedForm) {
  auto g = std::make_shared<GridDomain>(flat_line(), GridSpec{2.0, 1.0 / 32.0, 0.0});
  const double a = 0.0, b = 0.5;
  const ScalarField u = sample_field(g, [&](const Vec& x) {
    const double s = std::hypot(x[1], x[2]);
    return s > 0.0 ? exact_indicator_solution(a, b, x[0], s) : 0.0;
  });
  const ScalarField f = t_gradient_field(u);
  const double eps = g->eps_abs();
  for (const auto& [c, l] : {std::pair{0.25, 1.0}, std::pair{0.0, 0.5}}) {
    const ParamRegion box[] = {cube(Vec{c}, l)};
    const CarlesonResult r = carleson_norm(*g, [&](size_t i) { return f[i]; }, box);
    const double fine = exact_carleson_mass(a, b, c, l, eps) / l;
    const double coarse = exact_carleson_mass(a, b, c, l, 2.0 * eps) / l;
    EXPECT_NEAR(r.value, fine, 0.05 * fine) << "c = " << c << ", l = " << l;
    EXPECT_NEAR(r.coarse, coarse, 0.05 * coarse) << "c = " << c << ", l = " << l;
    EXPECT_NEAR(r.growth, fine / coarse, 0.03 * fine / coarse) << "c = " << c << ", l = " << l;
  }
}

TEST(PullBack, FlatIsIdentityAndGraphRecoversParameters) {
  const FlatSetup& s = flat_setup();
  const ScalarField u = sample_field(s.grid, [](const Vec& x) { return x[0] + 2.0 * x[2]; });
  const ScalarField same = pull_back(u);
  EXPECT_EQ(same.grid.get(), u.grid.get());
  const BoundarySet gb = BoundarySet::graph(3, std::make_shared<SinusoidalGraph>(1, 2, 0.1, 2.0));
  auto gg = std::make_shared<GridDomain>(gb, GridSpec{1.0, 1.0 / 8.0, 0.0});
  const ScalarField first = sample_field(gg, [](const Vec& x) { return x[0]; });
  const ScalarField back = pull_back(first);
  ASSERT_TRUE(back.grid->boundary().is_flat());
  for (size_t i = 0; i < back.grid->size(); ++i) {
    if (std::isnan(back[i])) continue;
    EXPECT_NEAR(back[i], back.grid->position(i)[0], 1e-12);
  }
}

TEST(PullBack, AffineProfileSurvivesTheTube) {
  // u = 1 + delta off the tube with the data 1 stored on tube nodes, as the
  // linear closure leaves it. Pulled values just above the flat tube must
  // follow the profile rather than average in the data.
  const BoundarySet gb = BoundarySet::graph(3, std::make_shared<SinusoidalGraph>(1, 2, 0.1, 2.0));
  auto gg = std::make_shared<GridDomain>(gb, GridSpec{1.0, 1.0 / 16.0, 0.0});
  ScalarField u(gg);
  for (size_t i = 0; i < gg->size(); ++i)
    u.values[i] = gg->node_class(i) == NodeClass::GammaTube ? 1.0 : 1.0 + gg->delta(i);
  const ScalarField back = pull_back(u);
  const GridDomain& fg = *back.grid;
  double worst = 0.0;
  int count = 0;
  for (size_t i = 0; i < fg.size(); ++i) {
    const Vec p = fg.position(i);
    const double s = std::hypot(p[1], p[2]);
    if (std::abs(p[0]) > 0.5 || s <= fg.eps_abs() || s > fg.eps_abs() + fg.spacing() || std::isnan(back[i])) continue;
    worst = std::max(worst, std::abs(back[i] - 1.0 - distance(gb, rho_map(gb, p))));
    ++count;
  }
  ASSERT_GT(count, 0);
  EXPECT_LT(worst, 0.1 * fg.spacing());
}

TEST(Output, MeasureAndDiagnosticsCsv) {
  const BoundarySet b = flat_line();
  const Partition p = box_partition(b, Vec{-1.0}, Vec{1.0}, 2);
  const HarmonicMeasure m = poisson_measure(b, p, 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "codim_measure_test";
  std::filesystem::create_directories(dir);
  write_measure_csv(m, (dir / "m.csv").string());
  write_density_csv(density(m), (dir / "k.csv").string());
  std::ifstream f(dir / "m.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "cell_id,center1,radius,sigma,mass,stderr");
  std::ifstream fk(dir / "k.csv");
  std::getline(fk, line);
  EXPECT_EQ(line, "cell_id,center1,radius,sigma,mass,stderr,density");
  const auto diag = (dir / "diagnostics.csv").string();
  std::filesystem::remove(diag);
  const DiagnosticRow rows[] = {{"doubling", "y=0;r=1", 1.41}};
  append_diagnostics_csv(rows, diag);
  append_diagnostics_csv(rows, diag);
  std::ifstream fd(diag);
  int count = 0;
  while (std::getline(fd, line)) ++count;
  EXPECT_EQ(count, 3);
  const DiagnosticRow bad[] = {{"a,b", "", 0.0}};
  EXPECT_THROW(append_diagnostics_csv(bad, diag), InvalidArgument);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace codim
