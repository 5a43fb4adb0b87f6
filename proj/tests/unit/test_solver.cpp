#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "codim/poisson.hpp"
#include "codim/solver.hpp"

namespace codim {
namespace {

std::shared_ptr<const GridDomain> flat_grid(double r, double h) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, BoundaryOptions{16.0, 1.0 / 256.0});
  return std::make_shared<GridDomain>(gamma, GridSpec{r, h, 0.0});
}

double cyl_radius(const Vec& x) { return std::hypot(x[1], x[2]); }

TEST(Assemble, ConstantsAreReproduced) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Smoothed, 1.0);
  const LinearSystem sys = assemble(g, a, BoundaryData::constant(1.0), [](const Vec&) { return 1.0; });
  SolveStats stats;
  const ScalarField u = solve(sys, SolveOptions{1e-10, 50000}, &stats);
  for (double v : u.values) EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(Assemble, UnitCoefficientGivesDiscreteLaplacian) {
  auto g = flat_grid(1.0, 1.0 / 8.0);
  const LinearSystem sys(g, ScalarField(g, 1.0), AssemblyOptions{TubeClosure::Plain});
  for (size_t i = 0; i < g->size(); ++i) {
    if (!sys.is_free(i)) continue;
    EXPECT_DOUBLE_EQ(sys.diagonal(i), 6.0);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(sys.face(i, k), 1.0);
  }
}

TEST(Assemble, SymmetricWithZeroRowSums) {
  auto g = flat_grid(1.0, 1.0 / 8.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const LinearSystem sys(g, a);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(g->size()), y(g->size()), ax, ay;
  for (size_t i = 0; i < g->size(); ++i) {
    x[i] = sys.is_free(i) ? u(rng) : 0.0;
    y[i] = sys.is_free(i) ? u(rng) : 0.0;
  }
  sys.apply(x, ax);
  sys.apply(y, ay);
  double xay = 0.0, yax = 0.0;
  for (size_t i = 0; i < g->size(); ++i) {
    xay += x[i] * ay[i];
    yax += y[i] * ax[i];
  }
  EXPECT_NEAR(xay, yax, 1e-10 * std::abs(xay));
  for (size_t i = 0; i < g->size(); ++i) {
    if (!sys.is_free(i)) continue;
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) sum += sys.face(i, k) + sys.face(i - g->stride(k), k);
    EXPECT_NEAR(sum, sys.diagonal(i), 1e-12 * sys.diagonal(i));
  }
}

double max_interior_error(double h) {
  auto g = flat_grid(1.0, h);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const LinearSystem sys = assemble(g, a, BoundaryData::constant(0.0), cyl_radius);
  const ScalarField u = solve(sys, SolveOptions{1e-10, 50000});
  double err = 0.0;
  for (size_t i = 0; i < g->size(); ++i)
    if (g->node_class(i) == NodeClass::Interior) err = std::max(err, std::abs(u[i] - cyl_radius(g->position(i))));
  return err;
}

TEST(Solve, CylindricalRadiusIsReproducedWithFirstOrderError) {
  // div(|t|^{-1} grad |t|) = 0 in R^3 minus the x-axis.
  const double e2 = max_interior_error(1.0 / 16.0);
  const double e3 = max_interior_error(1.0 / 32.0);
  EXPECT_LT(e3, 0.05);
  EXPECT_GE(e2 / e3, 1.7);
}

TEST(Solve, DiscreteMaximumPrinciple) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  LinearSystem sys(g, a);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data(g->size());
  for (double& v : data) v = u(rng);
  sys.set_dirichlet_values(data);
  const ScalarField sol = solve(sys);
  EXPECT_TRUE(max_principle_check(sol, sys));
  const double lo = sys.data_min(), hi = sys.data_max();
  for (double v : sol.values) {
    EXPECT_GE(v, lo - 1e-8);
    EXPECT_LE(v, hi + 1e-8);
  }
}

TEST(Solve, Linearity) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const BoundaryData g1 = BoundaryData::indicator_box(Vec{-0.5}, Vec{0.2}, 1.0 / 16.0);
  const BoundaryData g2 = BoundaryData::function([](const Vec& y) { return std::cos(y[0]); }, "cos");
  const OuterData o1 = [](const Vec& x) { return x[0] * x[1]; };
  const OuterData o2 = [](const Vec& x) { return 1.0 + x[2]; };
  const SolveOptions tight{1e-12, 50000};
  const ScalarField u1 = solve(assemble(g, a, g1, o1), tight);
  const ScalarField u2 = solve(assemble(g, a, g2, o2), tight);
  const ScalarField both = solve(assemble(g, a, BoundaryData::combine(2.0, g1, -1.0, g2),
                                          [&](const Vec& x) { return 2.0 * o1(x) - o2(x); }),
                                 tight);
  for (size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(both[i], 2.0 * u1[i] - u2[i], 1e-8);
}

TEST(Solve, ToleranceSelfConsistency) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const BoundaryData data = BoundaryData::indicator_box(Vec{-0.5}, Vec{0.5}, 1.0 / 16.0);
  const LinearSystem sys = assemble(g, a, data, poisson_extension(g->boundary(), data));
  const ScalarField loose = solve(sys, SolveOptions{1e-6, 50000});
  const ScalarField tight = solve(sys, SolveOptions{1e-10, 50000});
  for (size_t i = 0; i < g->size(); ++i) EXPECT_LT(std::abs(loose[i] - tight[i]), 1e-5);
}

TEST(Solve, NonConvergenceReportsResidual) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const LinearSystem sys = assemble(g, a, BoundaryData::constant(0.0), cyl_radius);
  try {
    solve(sys, SolveOptions{1e-12, 3});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 1e-12);
    EXPECT_EQ(e.iterations(), 3);
  }
}

TEST(Solve, EnergyIsMinimal) {
  auto g = flat_grid(1.0, 1.0 / 8.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  const LinearSystem sys = assemble(g, a, BoundaryData::constant(0.0), cyl_radius);
  const ScalarField u = solve(sys, SolveOptions{1e-12, 50000});
  const double e0 = sys.energy(u);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    size_t i = 0;
    do i = std::uniform_int_distribution<size_t>(0, g->size() - 1)(rng);
    while (!sys.is_free(i));
    ScalarField v = u;
    v.values[i] += (trial % 2 ? 1e-3 : -1e-3);
    EXPECT_GT(sys.energy(v), e0);
  }
}

TEST(Adjoint, WeightsReproduceSolutions) {
  auto g = flat_grid(1.0, 1.0 / 16.0);
  const ScalarField a = build_weight(g, WeightVariant::Geometric);
  LinearSystem sys(g, a);
  const Vec x{0.1, 0.0, 0.5};
  const AdjointWeights adj = solve_adjoint(sys, x, SolveOptions{1e-12, 50000});
  double total = 0.0;
  for (const auto& [j, mu] : adj.weights) {
    EXPECT_GE(mu, -1e-12);
    total += mu;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> data(g->size());
  for (double& v : data) v = u(rng);
  sys.set_dirichlet_values(data);
  const ScalarField sol = solve(sys, SolveOptions{1e-12, 50000});
  double pred = 0.0;
  for (const auto& [j, mu] : adj.weights) pred += mu * data[j];
  EXPECT_NEAR(pred, interpolate(sol, x), 1e-9);
}

TEST(Harnack, ConstantAndRadialFields) {
  auto g = flat_grid(2.0, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(harnack_ratio(ScalarField(g, 2.5), Vec{0.0, 0.0, 1.0}, 0.25), 1.0);
  const ScalarField t = sample_field(g, cyl_radius);
  EXPECT_NEAR(harnack_ratio(t, Vec{0.0, 0.0, 1.0}, 0.25), 5.0 / 3.0, 1e-12);
  EXPECT_THROW(harnack_ratio(t, Vec{0.0, 0.0, 0.3}, 0.25), PreconditionError);
}

TEST(Poisson, IntervalMatchesKernelQuadrature) {
  for (const auto& [x, s] : {std::pair{0.0, 1.0}, std::pair{0.7, 0.3}, std::pair{-2.0, 0.05}}) {
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return poisson_kernel(Vec{x - y}, s); }, -1.0, 1.0, 15, 1e-13);
    EXPECT_NEAR(poisson_interval(x, s, -1.0, 1.0), oracle, 1e-10);
  }
  EXPECT_NEAR(poisson_interval(0.0, 1.0, -1.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(poisson_interval(0.0, 1.0, -2.0, 2.0), 2.0 / std::numbers::pi * std::atan(2.0), 1e-15);
}

TEST(Poisson, MollifiedIndicatorClosedFormMatchesLatticeSum) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, BoundaryOptions{16.0, 1.0 / 1024.0});
  const BoundaryData box = BoundaryData::indicator_box(Vec{-1.0}, Vec{0.5}, 1.0 / 16.0);
  const BoundaryData same = BoundaryData::function([&](const Vec& y) { return box(y); }, "copy");
  for (const auto& [x, s] : {std::pair{0.0, 1.0}, std::pair{0.45, 0.1}, std::pair{-1.2, 0.25}}) {
    EXPECT_NEAR(poisson_integral(gamma, box, Vec{x}, s), poisson_integral(gamma, same, Vec{x}, s), 1e-6);
  }
}

}  // namespace
}  // namespace codim
