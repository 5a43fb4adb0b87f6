#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "codim/geometry.hpp"

namespace codim {
namespace {

BoundaryOptions small_window() { return BoundaryOptions{16.0, 1.0 / 128.0}; }

BoundarySet sine_graph(double lambda = 0.1, double frequency = 1.0) {
  return BoundarySet::graph(3, std::make_shared<SinusoidalGraph>(1, 2, lambda, frequency), small_window());
}

BoundarySet affine_line(double slope) {
  SmallMatrix a;
  a.rows = 2;
  a.cols = 1;
  a(0, 0) = slope;
  return BoundarySet::graph(3, std::make_shared<AffineGraph>(a, Vec{0.0, 0.0}), small_window());
}

// Independent oracle: integral over R of (s^2 + z^2)^{-(1+alpha)/2}.
double flat_line_integral(double s, double alpha) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  return integrator.integrate([&](double z) { return std::pow(s * s + z * z, -0.5 * (1.0 + alpha)); });
}

TEST(Distance, PythagorasForTheXAxis) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  EXPECT_DOUBLE_EQ(distance(gamma, Vec{5.0, 3.0, 4.0}), 5.0);
}

TEST(Distance, ZeroGraphMatchesFlatPlane) {
  const BoundarySet flat = BoundarySet::flat(3, 1, small_window());
  const BoundarySet zero = affine_line(0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x{u(rng), u(rng), u(rng)};
    EXPECT_NEAR(distance(zero, x), distance(flat, x), 1e-12);
  }
}

TEST(Distance, TiltedLineAgainstDenseSampling) {
  const double lambda = 0.1;
  const BoundarySet gamma = affine_line(lambda);
  const Vec x{0.0, 0.0, 1.0};
  // Brute force over 10^6 samples of the line.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1'000'000; ++i) {
    const double y = -5.0 + 1e-5 * i;
    best = std::min(best, std::sqrt(y * y + lambda * lambda * y * y + 1.0));
  }
  const double got = distance(gamma, x);
  EXPECT_NEAR(got, best, 1e-6 * best);
  EXPECT_NEAR(got, 1.0, 1e-9);
}

TEST(Distance, SinusoidAgainstDenseSampling) {
  const BoundarySet gamma = sine_graph(0.3, 2.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x{u(rng), u(rng), u(rng)};
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400'000; ++i) {
      const double y = x[0] - 4.0 + 2e-5 * i;
      const Vec g = gamma.lift(Vec{y});
      best = std::min(best, norm(x - g));
    }
    EXPECT_NEAR(distance(gamma, x), best, 1e-6 * best + 1e-9);
  }
}

TEST(Distance, IsOneLipschitz) {
  const BoundarySet gamma = sine_graph(0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const Vec a{u(rng), u(rng), u(rng)};
    const Vec b{u(rng), u(rng), u(rng)};
    EXPECT_LE(std::abs(distance(gamma, a) - distance(gamma, b)), norm(a - b) + 1e-9);
  }
}

TEST(Distance, HintedProjectionAgreesWithSearch) {
  const BoundarySet gamma = sine_graph(0.1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x{u(rng), u(rng), u(rng)};
    const Projection a = project(gamma, x);
    const Projection b = project_from_hint(gamma, x, Vec{x[0] + 0.3});
    EXPECT_NEAR(a.distance, b.distance, 1e-12);
  }
}

TEST(Distance, SampledGraphOutOfWindow) {
  const std::string path = ::testing::TempDir() + "sampled_graph.csv";
  {
    std::ofstream out(path);
    out << "x1,F1,F2\n";
    for (int i = 0; i <= 200; ++i) {
      const double x = -2.0 + 0.02 * i;
      out << x << "," << 0.1 * std::sin(x) << ",0\n";
    }
  }
  auto f = SampledGraph::from_csv(path, 3, 1, -1.0);
  EXPECT_NEAR(f->lipschitz(), 0.1, 1e-3);
  const BoundarySet gamma = BoundarySet::graph(3, f, BoundaryOptions{16.0, 1.0 / 64.0});
  EXPECT_NEAR(gamma.window_radius(), 2.0, 1e-12);
  const BoundarySet exact = sine_graph(0.1);
  EXPECT_NEAR(distance(gamma, Vec{0.3, 0.2, 0.4}), distance(exact, Vec{0.3, 0.2, 0.4}), 1e-4);
  EXPECT_THROW(distance(gamma, Vec{2.5, 0.0, 1.0}), OutOfWindowError);
  std::remove(path.c_str());
}

TEST(Boundary, RejectsCodimensionOne) {
  EXPECT_THROW(BoundarySet::flat(3, 2), InvalidArgument);
  EXPECT_NO_THROW(BoundarySet::flat(4, 2, BoundaryOptions{4.0, 0.25}));
}

TEST(SmoothedDistance, FlatConstantMatchesClosedForm) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    const double oracle = integrator.integrate([&](double z) { return std::pow(1.0 + z * z, -0.5 * (1.0 + alpha)); });
    EXPECT_NEAR(flat_smoothed_constant(1, alpha), oracle, 1e-10 * oracle);
  }
  EXPECT_NEAR(flat_smoothed_constant(1, 1.0), std::numbers::pi, 1e-14);
  EXPECT_NEAR(flat_smoothed_constant(1, 2.0), 2.0, 1e-14);
}

TEST(SmoothedDistance, FlatLineExamples) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, small_window());
  // alpha = 2, delta = 2: D = (2/4)^{-1/2} = sqrt(2).
  const double oracle2 = std::pow(flat_line_integral(2.0, 2.0), -0.5);
  EXPECT_NEAR(oracle2, std::sqrt(2.0), 1e-9);
  // alpha = 1, delta = 1: D = 1/pi.
  const double oracle1 = 1.0 / flat_line_integral(1.0, 1.0);
  EXPECT_NEAR(oracle1, 1.0 / std::numbers::pi, 1e-9);

  SmoothedDistanceOptions quadrature_route;
  quadrature_route.route = SmoothedRoute::Quadrature;
  for (const auto& opts : {SmoothedDistanceOptions{}, quadrature_route}) {
    EXPECT_NEAR(smoothed_distance(gamma, Vec{0.0, 2.0, 0.0}, 2.0, opts), oracle2, 1e-4 * oracle2);
    EXPECT_NEAR(smoothed_distance(gamma, Vec{0.0, 0.0, 1.0}, 1.0, opts), oracle1, 1e-4 * oracle1);
  }
}

TEST(SmoothedDistance, FlatTranslationAndRotationInvariance) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, small_window());
  SmoothedDistanceOptions opts;
  opts.route = SmoothedRoute::Quadrature;
  const double base = smoothed_distance(gamma, Vec{0.0, 0.6, 0.8}, 1.0, opts);
  EXPECT_NEAR(smoothed_distance(gamma, Vec{1.7, 0.6, 0.8}, 1.0, opts), base, 2e-4 * base);
  EXPECT_NEAR(smoothed_distance(gamma, Vec{0.0, -0.8, 0.6}, 1.0, opts), base, 2e-4 * base);
  EXPECT_NEAR(smoothed_distance(gamma, Vec{0.0, 1.0, 0.0}, 1.0, opts), base, 2e-4 * base);
}

TEST(SmoothedDistance, RatioToDistanceIsBoundedOnGraph) {
  const BoundarySet gamma = sine_graph(0.1);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x{u(rng), u(rng), u(rng)};
    const double ratio = smoothed_distance(gamma, x, 1.0) / distance(gamma, x);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  // Flat value is 1/pi; a lambda = 0.1 graph stays close to it.
  EXPECT_GT(lo, 0.25);
  EXPECT_LT(hi, 0.40);
}

TEST(SmoothedDistance, GradientMatchesFiniteDifferences) {
  const BoundarySet gamma = sine_graph(0.1);
  const Vec x{0.4, 0.3, -0.5};
  const SmoothedDistanceGradient g = smoothed_distance_gradient(gamma, x, 1.0);
  const SmoothedDistanceGradient fast = smoothed_distance_gradient(gamma, x, 1.0, true);
  SmoothedDistanceOptions tight;
  tight.rel_tol = 1e-9;
  const double step = 1e-4;
  for (int i = 0; i < 3; ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd =
        (std::log(smoothed_distance(gamma, xp, 1.0, tight)) - std::log(smoothed_distance(gamma, xm, 1.0, tight))) /
        (2 * step);
    EXPECT_NEAR(g.grad_log[i], fd, 1e-4);
    EXPECT_NEAR(fast.grad_log[i], fd, 1e-3);
  }
  EXPECT_NEAR(fast.value, g.value, 1e-4 * g.value);
}

TEST(SmoothedDistance, SingularOnBoundary) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  EXPECT_THROW(smoothed_distance(gamma, Vec{1.0, 0.0, 0.0}, 1.0), SingularPointError);
}

TEST(SmoothedDistance, TwoDimensionalFlatQuadrature) {
  const BoundarySet gamma = BoundarySet::flat(4, 2, BoundaryOptions{4.0, 0.25});
  SmoothedDistanceOptions opts;
  opts.route = SmoothedRoute::Quadrature;
  const double expected = std::pow(flat_smoothed_constant(2, 1.0), -1.0) * 0.5;
  EXPECT_NEAR(smoothed_distance(gamma, Vec{0.1, -0.2, 0.3, 0.4}, 1.0, opts), expected, 2e-4 * expected);
}

// Oracle: arclength of the part of the graph inside the ball, from the
// parameter interval endpoints (bisection) and Gauss-Kronrod integration.
double graph_ball_arclength(const BoundarySet& gamma, double center, double r) {
  const Vec c = gamma.lift(Vec{center});
  auto inside = [&](double y) { return norm(gamma.lift(Vec{y}) - c) < r; };
  auto edge = [&](double dir) {
    double lo = center, hi = center + dir * 2.0 * r;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) ? lo : hi) = mid;
    }
    return lo;
  };
  const double a = edge(-1.0), b = edge(1.0);
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double y) { return gamma.area_factor(Vec{y}); }, a, b, 10, 1e-12);
}

TEST(Ahlfors, FlatLineIsExact) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, small_window());
  const std::vector<Vec> centers{Vec{0.0}, Vec{0.37}, Vec{-1.2}};
  const std::vector<double> scales{0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  const AhlforsEstimate est = ahlfors_check(gamma, centers, scales);
  EXPECT_NEAR(est.dimension, 1.0, 1e-3);
  EXPECT_NEAR(est.constant, 2.0, 1e-9);
  for (const auto& s : est.samples) EXPECT_NEAR(s.measure, 2.0 * s.radius, 1e-9);
}

TEST(Ahlfors, SinusoidMatchesArclengthOracle) {
  const BoundarySet gamma = sine_graph(0.1);
  const std::vector<Vec> centers{Vec{0.0}, Vec{0.8}, Vec{-1.5}, Vec{2.1}};
  const std::vector<double> scales{0.125, 0.25, 0.5, 1.0, 2.0};
  for (const Vec& c : centers)
    for (double r : scales) {
      const double oracle = graph_ball_arclength(gamma, c[0], r);
      EXPECT_NEAR(ball_surface_measure(gamma, c, r), oracle, 1e-4 * oracle);
    }
  const AhlforsEstimate est = ahlfors_check(gamma, centers, scales);
  EXPECT_NEAR(est.dimension, 1.0, 0.05);
  EXPECT_LE(est.constant, 2.5);
}

TEST(Ahlfors, SingleScaleDefinition) {
  const BoundarySet gamma = sine_graph(0.3, 3.0);
  const std::vector<Vec> centers{Vec{0.2}};
  const std::vector<double> scales{0.5};
  const AhlforsEstimate est = ahlfors_check(gamma, centers, scales);
  const double mass = est.samples.at(0).measure;
  EXPECT_DOUBLE_EQ(est.constant, std::max(mass / 0.5, 0.5 / mass));
}

TEST(Ahlfors, ScalesOutsideRangeRejected) {
  const BoundarySet gamma = BoundarySet::flat(3, 1, small_window());
  const std::vector<Vec> centers{Vec{0.0}};
  const std::vector<double> tiny{0.01};
  EXPECT_THROW(ahlfors_check(gamma, centers, tiny), PreconditionError);
}

// Oracle: best clearance over a grid of candidate endpoints in the two balls.
double brute_force_clearance(const BoundarySet& gamma, const Vec& x1, const Vec& x2, double r) {
  std::vector<Vec> offsets;
  const int m = 6;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        const Vec o{0.5 * r * i / m, 0.5 * r * j / m, 0.5 * r * k / m};
        if (norm(o) < 0.5 * r) offsets.push_back(o);
      }
  double best = 0.0;
  for (const Vec& a : offsets)
    for (const Vec& b : offsets) best = std::max(best, segment_clearance(gamma, x1 + a, x2 + b));
  return best;
}

TEST(HarnackChain, DegenerateChain) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  const double r = 0.5;
  const Vec x{0.3, 0.0, 0.7};
  const Tube tube = harnack_chain(gamma, x, x, r, 1.0);
  EXPECT_TRUE(tube.success);
  EXPECT_GE(tube.clearance, r);
}

TEST(HarnackChain, FlatLongChain) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  const double r = 0.5;
  const Vec x1{0.0, 0.0, r}, x2{10 * r, 0.0, r};
  const Tube tube = harnack_chain(gamma, x1, x2, r, 10.0);
  const double brute = brute_force_clearance(gamma, x1, x2, r);
  EXPECT_TRUE(tube.success);
  EXPECT_GE(tube.clearance, 1e-2 * r / 10.0);
  EXPECT_GE(tube.clearance, 0.95 * brute);
  EXPECT_LE(norm(tube.y1 - x1), 0.5 * r);
  EXPECT_LE(norm(tube.y2 - x2), 0.5 * r);
}

TEST(HarnackChain, FlatOppositeSides) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  const double r = 0.5;
  const Vec x1{0.0, 0.0, r}, x2{0.0, 0.0, -r};
  EXPECT_NEAR(segment_clearance(gamma, x1, x2), 0.0, 1e-15);
  const Tube tube = harnack_chain(gamma, x1, x2, r, 2.0);
  const double brute = brute_force_clearance(gamma, x1, x2, r);
  EXPECT_TRUE(tube.success);
  EXPECT_GE(tube.clearance, 1e-2 * r / 2.0);
  EXPECT_GE(tube.clearance, 0.95 * brute);
}

TEST(HarnackChain, GraphChain) {
  const BoundarySet gamma = sine_graph(0.1);
  const double r = 0.4;
  const Vec x1 = gamma.lift(Vec{-1.0}) + Vec{0.0, 0.0, 1.2 * r};
  const Vec x2 = gamma.lift(Vec{1.0}) + Vec{0.0, 0.0, -1.2 * r};
  const double lambda = norm(x1 - x2) / r;
  const Tube tube = harnack_chain(gamma, x1, x2, r, lambda);
  EXPECT_TRUE(tube.success);
  EXPECT_GE(tube.clearance, tube.threshold);
}

TEST(RhoMap, FlatIsIdentity) {
  const BoundarySet gamma = BoundarySet::flat(3, 1);
  const Vec p{0.3, -0.2, 0.9};
  EXPECT_EQ(rho_map(gamma, p), p);
}

TEST(RhoMap, AffineGraphIsShear) {
  const BoundarySet gamma = affine_line(0.25);
  const Vec p{0.7, 0.1, -0.4};
  const Vec q = rho_map(gamma, p);
  EXPECT_NEAR(q[0], 0.7, 1e-14);
  EXPECT_NEAR(q[1], 0.25 * 0.7 + 0.1, 1e-12);
  EXPECT_NEAR(q[2], -0.4, 1e-12);
  const Vec back = rho_inverse(gamma, q);
  EXPECT_NEAR(norm(back - p), 0.0, 1e-12);
}

TEST(RhoMap, SinusoidIsNearIsometry) {
  const double lambda = 0.1;
  const BoundarySet gamma = sine_graph(lambda);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> nrm;
  double lo = 10.0, hi = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vec p{u(rng), u(rng), u(rng)};
    Vec dir{nrm(rng), nrm(rng), nrm(rng)};
    dir *= 1e-5 / norm(dir);
    const double q = norm(rho_map(gamma, p + dir) - rho_map(gamma, p)) / norm(dir);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  EXPECT_GE(lo, 1.0 - 3.0 * lambda);
  EXPECT_LE(hi, 1.0 + 3.0 * lambda);
  // rho(x, 0) lies on the boundary.
  EXPECT_NEAR(distance(gamma, rho_map(gamma, Vec{0.4, 0.0, 0.0})), 0.0, 1e-12);
}

}  // namespace
}  // namespace codim
